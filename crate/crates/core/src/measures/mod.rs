//! The ten marginal dependence utilities and feature-wise scoring.

mod ball;
mod correlation;
mod distance;
mod projection;
mod wasserstein;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ball::bcor_utility;
pub use correlation::{kendall_utility, midranks, pearson_utility, scaled_ranks, sirs_utility};
pub use distance::{dcor_utility, sc_utility, DistanceTransform};
pub use projection::pc_utility;
pub use wasserstein::{wd_utility, WdOptions, WdPreprocess};

use crate::data::{PredictorArray, ResponseBlock};
use crate::error::{Error, Result};
use crate::screening::ScoreTable;
use crate::transport::multivariate_rank;

use ball::PreparedBall;
use correlation::{abs_pearson_centered, center};
use distance::PreparedDistance;
use projection::PreparedProjection;
use wasserstein::PreparedWasserstein;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MeasureKind {
    Sis,
    Sirs,
    Rrcs,
    DcSis,
    DcRoSis,
    MrDcSis,
    ScSis,
    PcScreen,
    BcorSis,
    WdScreen,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 10] = [
        MeasureKind::Sis,
        MeasureKind::Sirs,
        MeasureKind::Rrcs,
        MeasureKind::DcSis,
        MeasureKind::DcRoSis,
        MeasureKind::MrDcSis,
        MeasureKind::ScSis,
        MeasureKind::PcScreen,
        MeasureKind::BcorSis,
        MeasureKind::WdScreen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Sis => "SIS",
            MeasureKind::Sirs => "SIRS",
            MeasureKind::Rrcs => "RRCS",
            MeasureKind::DcSis => "DC-SIS",
            MeasureKind::DcRoSis => "DC-RoSIS",
            MeasureKind::MrDcSis => "MrDc-SIS",
            MeasureKind::ScSis => "SC-SIS",
            MeasureKind::PcScreen => "PC-Screen",
            MeasureKind::BcorSis => "BCor-SIS",
            MeasureKind::WdScreen => "WD-Screen",
        }
    }

    /// Methods that only take a scalar predictor and a scalar response.
    pub fn univariate_only(self) -> bool {
        matches!(
            self,
            MeasureKind::Sis | MeasureKind::Sirs | MeasureKind::Rrcs | MeasureKind::DcRoSis
        )
    }

    pub fn multivariate() -> Vec<MeasureKind> {
        Self::ALL.into_iter().filter(|k| !k.univariate_only()).collect()
    }

    pub fn check_dims(self, d: usize, q: usize) -> Result<()> {
        if self.univariate_only() && (d != 1 || q != 1) {
            return Err(Error::Config(format!(
                "{} cannot handle multivariate predictors or response (d={d}, q={q})",
                self.name()
            )));
        }
        Ok(())
    }

    /// Parses a comma-separated list; `all` expands to every method.
    pub fn parse_list(s: &str) -> Result<Vec<MeasureKind>> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if item.eq_ignore_ascii_case("all") {
                out.extend(Self::ALL);
            } else {
                out.push(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("empty method list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        let kind = match key.as_str() {
            "sis" => MeasureKind::Sis,
            "sirs" => MeasureKind::Sirs,
            "rrcs" => MeasureKind::Rrcs,
            "dcsis" | "dc" => MeasureKind::DcSis,
            "dcrosis" => MeasureKind::DcRoSis,
            "mrdcsis" | "mrdc" => MeasureKind::MrDcSis,
            "scsis" | "sc" => MeasureKind::ScSis,
            "pcscreen" | "pc" => MeasureKind::PcScreen,
            "bcorsis" | "bcor" => MeasureKind::BcorSis,
            "wdscreen" | "wd" => MeasureKind::WdScreen,
            _ => {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                return Err(Error::Config(format!(
                    "unknown method '{s}' (expected one of {})",
                    names.join(", ")
                )));
            }
        };
        Ok(kind)
    }
}

impl TryFrom<String> for MeasureKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MeasureKind> for String {
    fn from(k: MeasureKind) -> String {
        k.name().to_string()
    }
}

/// Per-method tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureOptions {
    pub sc_transform: DistanceTransform,
    pub wd: WdOptions,
}

/// DC-RoSIS utility: distance correlation of `x` with `ranks(y) / n`.
pub fn dc_rosis_utility(x: &[f64], y: &[f64]) -> f64 {
    let xb = Array2::from_shape_vec((x.len(), 1), x.to_vec()).expect("column");
    let r = scaled_ranks(y);
    let yb = Array2::from_shape_vec((r.len(), 1), r).expect("column");
    dcor_utility(xb.view(), yb.view())
}

/// MrDc-SIS utility: distance correlation between multivariate ranks.
pub fn mrdc_utility(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    if is_constant(x) || is_constant(y) {
        return 0.0;
    }
    let rx = multivariate_rank(x);
    let ry = multivariate_rank(y);
    dcor_utility(rx.view(), ry.view())
}

fn is_constant(z: ArrayView2<'_, f64>) -> bool {
    z.rows().into_iter().all(|r| r == z.row(0))
}

#[derive(Debug)]
enum Prepared {
    Pearson { yc: Vec<f64>, syy: f64, constant: bool },
    Kendall(Vec<f64>),
    Distance(PreparedDistance),
    /// Ranked response; `None` when the raw response is constant.
    RankedDistance(Option<PreparedDistance>),
    Projection(PreparedProjection),
    Ball(PreparedBall),
    Wasserstein(PreparedWasserstein),
}

/// Response-side precomputation for one method, reused across features.
#[derive(Debug)]
pub struct PreparedResponse {
    kind: MeasureKind,
    n: usize,
    q: usize,
    inner: Prepared,
}

impl PreparedResponse {
    pub fn new(y: ArrayView2<'_, f64>, kind: MeasureKind, opts: &MeasureOptions) -> Result<Self> {
        let (n, q) = y.dim();
        kind.check_dims(1, q)?;
        if n < 2 {
            return Err(Error::Argument(format!("{} needs at least 2 subjects, got {n}", kind.name())));
        }
        let col = || y.column(0).to_vec();
        let inner = match kind {
            MeasureKind::Sis | MeasureKind::Sirs => {
                let v = if kind == MeasureKind::Sis { col() } else { scaled_ranks(&col()) };
                let constant = v.iter().all(|&t| t == v[0]);
                let (yc, syy) = center(&v);
                Prepared::Pearson { yc, syy, constant }
            }
            MeasureKind::Rrcs => Prepared::Kendall(col()),
            MeasureKind::DcSis => Prepared::Distance(PreparedDistance::new(y, DistanceTransform::Identity)),
            MeasureKind::DcRoSis => {
                let r = Array2::from_shape_vec((n, 1), scaled_ranks(&col())).expect("column");
                Prepared::Distance(PreparedDistance::new(r.view(), DistanceTransform::Identity))
            }
            MeasureKind::MrDcSis => {
                Prepared::RankedDistance((!is_constant(y)).then(|| {
                    PreparedDistance::new(multivariate_rank(y).view(), DistanceTransform::Identity)
                }))
            }
            MeasureKind::ScSis => Prepared::Distance(PreparedDistance::new(y, opts.sc_transform)),
            MeasureKind::PcScreen => Prepared::Projection(PreparedProjection::new(y)),
            MeasureKind::BcorSis => Prepared::Ball(PreparedBall::new(y)),
            MeasureKind::WdScreen => {
                opts.wd.validate()?;
                Prepared::Wasserstein(PreparedWasserstein::new(y, opts.wd))
            }
        };
        Ok(Self { kind, n, q, inner })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    /// Utility of one `n x d` feature block against the prepared response.
    pub fn score(&self, x: ArrayView2<'_, f64>) -> Result<f64> {
        let (n, d) = x.dim();
        if n != self.n {
            return Err(Error::Argument(format!("feature block has {n} rows, response has {}", self.n)));
        }
        self.kind.check_dims(d, self.q)?;
        let col = || x.column(0).to_vec();
        Ok(match &self.inner {
            Prepared::Pearson { yc, syy, constant } => abs_pearson_centered(&col(), yc, *syy, *constant),
            Prepared::Kendall(y) => kendall_utility(&col(), y),
            Prepared::Distance(p) => p.score(x),
            Prepared::RankedDistance(p) => match p {
                Some(p) if !is_constant(x) => p.score(multivariate_rank(x).view()),
                _ => 0.0,
            },
            Prepared::Projection(p) => p.score(x),
            Prepared::Ball(p) => p.score(x),
            Prepared::Wasserstein(p) => p.score(x)?,
        })
    }
}

/// Utility of a single feature block under `kind`.
pub fn utility(kind: MeasureKind, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, opts: &MeasureOptions) -> Result<f64> {
    kind.check_dims(x.ncols(), y.ncols())?;
    PreparedResponse::new(y, kind, opts)?.score(x)
}

/// Scores every feature of `x` against `y`. Features are distributed over the
/// current rayon pool; the result is ordered by feature index.
pub fn score_all(x: &PredictorArray, y: &ResponseBlock, kind: MeasureKind, opts: &MeasureOptions) -> Result<ScoreTable> {
    if x.subjects() != y.subjects() {
        return Err(Error::Argument(format!(
            "predictors have {} subjects, response has {}",
            x.subjects(),
            y.subjects()
        )));
    }
    kind.check_dims(x.platforms(), y.dims())?;
    let prepared = PreparedResponse::new(y.view(), kind, opts)?;
    let utilities = (0..x.features())
        .into_par_iter()
        .map(|j| prepared.score(x.feature_block(j)?.view()))
        .collect::<Result<Vec<f64>>>()?;
    ScoreTable::new(kind, utilities)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array3};

    #[test]
    fn names_round_trip() {
        for k in MeasureKind::ALL {
            assert_eq!(k.name().parse::<MeasureKind>().unwrap(), k);
            assert_eq!(k.name().to_lowercase().replace('-', "_").parse::<MeasureKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(serde_json::from_str::<MeasureKind>(&json).unwrap(), k);
        }
        assert!("nope".parse::<MeasureKind>().is_err());
        assert_eq!(MeasureKind::parse_list("all").unwrap().len(), 10);
        assert_eq!(MeasureKind::multivariate().len(), 6);
    }

    #[test]
    fn univariate_methods_reject_blocks() {
        let x = Array2::<f64>::zeros((5, 3));
        let y = Array2::<f64>::zeros((5, 1));
        let err = utility(MeasureKind::Sis, x.view(), y.view(), &MeasureOptions::default()).unwrap_err();
        assert!(err.to_string().contains("SIS"));
        assert!(utility(MeasureKind::DcSis, x.view(), y.view(), &MeasureOptions::default()).is_ok());
    }

    #[test]
    fn duplicated_response_feature_wins() {
        let y = vec![0.3, -1.0, 2.0, 0.7, 1.1, -0.2, 0.5, 1.7];
        let noise1 = vec![1.0, 0.0, 1.0, 0.5, 0.2, 0.9, 0.1, 0.4];
        let noise2 = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut v = Array3::zeros((1, 8, 3));
        for i in 0..8 {
            v[[0, i, 0]] = noise1[i];
            v[[0, i, 1]] = y[i];
            v[[0, i, 2]] = noise2[i];
        }
        let x = PredictorArray::new(v).unwrap();
        let yb = ResponseBlock::from_vector(y).unwrap();
        for kind in MeasureKind::ALL {
            let t = score_all(&x, &yb, kind, &MeasureOptions::default()).unwrap();
            let u = t.utilities();
            assert!(u[1] > u[0] && u[1] > u[2], "{kind}: {u:?}");
            assert_eq!(u[2], 0.0, "{kind}");
        }
    }

    #[test]
    fn dc_rosis_and_mrdc_rank_invariance() {
        let x = [0.3, -1.0, 2.0, 0.7, 1.1, -0.2];
        let y = [1.0, -0.5, 2.5, 0.1, 1.4, 0.0];
        let y2: Vec<f64> = y.iter().map(|v: &f64| v.exp()).collect();
        assert_eq!(dc_rosis_utility(&x, &y), dc_rosis_utility(&x, &y2));
        let xb = Array2::from_shape_vec((6, 1), x.to_vec()).unwrap();
        let yb = Array2::from_shape_vec((6, 1), y.to_vec()).unwrap();
        let y2b = Array2::from_shape_vec((6, 1), y2).unwrap();
        assert_eq!(mrdc_utility(xb.view(), yb.view()), mrdc_utility(xb.view(), y2b.view()));
        let z = array![[0.1, 2.0], [1.5, -1.0], [0.7, 0.3], [2.2, 1.1], [-0.4, 0.0]];
        assert!((mrdc_utility(z.view(), z.view()) - 1.0).abs() < 1e-12);
    }
}
