//! Dataset and configuration types shared by the rest of the crate.
//!
//! Predictor arrays are stored platform-major as `[platform][subject][feature]`,
//! so a feature block is a strided view of `d * n` values.

use ndarray::{Array2, Array3, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `d x n x p` array of predictors: `d` platforms, `n` subjects, `p` features.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorArray {
    values: Array3<f64>,
}

impl PredictorArray {
    pub fn new(values: Array3<f64>) -> Result<Self> {
        let (d, n, p) = values.dim();
        if d == 0 || n == 0 || p == 0 {
            return Err(Error::Argument(format!(
                "predictor array extents must be positive, got {d}x{n}x{p}"
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite predictor value {bad}")));
        }
        Ok(Self { values })
    }

    /// Builds a single-platform array from an `n x p` matrix.
    pub fn from_matrix(m: Array2<f64>) -> Result<Self> {
        Self::new(m.insert_axis(Axis(0)))
    }

    /// Stacks `n x p` platform matrices into one array.
    pub fn from_platforms(platforms: &[Array2<f64>]) -> Result<Self> {
        let first = platforms
            .first()
            .ok_or_else(|| Error::Argument("no platforms given".into()))?;
        let (n, p) = first.dim();
        let mut values = Array3::zeros((platforms.len(), n, p));
        for (k, m) in platforms.iter().enumerate() {
            if m.dim() != (n, p) {
                return Err(Error::Argument(format!(
                    "platform {k} is {:?}, expected {:?}",
                    m.dim(),
                    (n, p)
                )));
            }
            values.index_axis_mut(Axis(0), k).assign(m);
        }
        Self::new(values)
    }

    pub fn platforms(&self) -> usize {
        self.values.dim().0
    }

    pub fn subjects(&self) -> usize {
        self.values.dim().1
    }

    pub fn features(&self) -> usize {
        self.values.dim().2
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    /// The `n x d` block of feature `j` (0-based); row `i` holds subject `i`
    /// across all platforms.
    pub fn feature_block(&self, j: usize) -> Result<Array2<f64>> {
        if j >= self.features() {
            return Err(Error::Index {
                index: j,
                extent: self.features(),
            });
        }
        Ok(self.values.index_axis(Axis(2), j).t().to_owned())
    }

    /// Reassembles an array from per-feature `n x d` blocks.
    pub fn from_feature_blocks(blocks: &[Array2<f64>]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Argument("no feature blocks given".into()))?;
        let (n, d) = first.dim();
        let mut values = Array3::zeros((d, n, blocks.len()));
        for (j, b) in blocks.iter().enumerate() {
            if b.dim() != (n, d) {
                return Err(Error::Argument(format!("feature block {j} has shape {:?}", b.dim())));
            }
            values.index_axis_mut(Axis(2), j).assign(&b.t());
        }
        Self::new(values)
    }
}

/// An `n x q` response matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseBlock {
    values: Array2<f64>,
}

impl ResponseBlock {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, q) = values.dim();
        if n == 0 || q == 0 {
            return Err(Error::Argument(format!("response extents must be positive, got {n}x{q}")));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite response value {bad}")));
        }
        Ok(Self { values })
    }

    pub fn from_vector(y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        let values = Array2::from_shape_vec((n, 1), y).map_err(|e| Error::Argument(e.to_string()))?;
        Self::new(values)
    }

    pub fn subjects(&self) -> usize {
        self.values.nrows()
    }

    pub fn dims(&self) -> usize {
        self.values.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Column-wise standardization to mean 0 and unit sample standard deviation
/// (divisor `n - 1`). Constant columns map to zeros.
pub fn standardize(m: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = m.nrows();
    let mut out = Array2::zeros(m.raw_dim());
    if n < 2 {
        return out;
    }
    for (col, mut dst) in m.columns().into_iter().zip(out.columns_mut()) {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            continue;
        }
        let mean = col.sum() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        if sd == 0.0 || !sd.is_finite() {
            continue;
        }
        dst.zip_mut_with(&col, |o, &v| *o = (v - mean) / sd);
    }
    out
}

/// A true (active) feature and the platforms it enters through, one entry per
/// active response coordinate. Empty for single-platform designs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueFeature {
    pub feature: usize,
    #[serde(default)]
    pub platforms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrueSet {
    pub entries: Vec<TrueFeature>,
}

impl TrueSet {
    pub fn from_features(features: &[usize]) -> Self {
        Self {
            entries: features
                .iter()
                .map(|&feature| TrueFeature {
                    feature,
                    platforms: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn features(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.feature).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate(&self, features: usize, platforms: usize) -> Result<()> {
        for e in &self.entries {
            if e.feature >= features {
                return Err(Error::Index {
                    index: e.feature,
                    extent: features,
                });
            }
            if let Some(&k) = e.platforms.iter().find(|&&k| k >= platforms) {
                return Err(Error::Index {
                    index: k,
                    extent: platforms,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Marginal {
    Gaussian,
    Power { a: f64 },
    Pareto { shape: f64, mode: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Gaussian => Ok(()),
            Marginal::Power { a } if a > 0.0 && a.is_finite() => Ok(()),
            Marginal::Power { a } => Err(Error::Config(format!("power parameter must be > 0, got {a}"))),
            Marginal::Pareto { shape, mode } if shape > 1.0 && mode > 0.0 && mode.is_finite() => Ok(()),
            Marginal::Pareto { shape, mode } => Err(Error::Config(format!(
                "pareto needs shape > 1 and mode > 0, got shape {shape}, mode {mode}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Study {
    S1,
    S2,
    S3,
    S4,
}

impl Study {
    pub fn is_multivariate(self) -> bool {
        matches!(self, Study::S3 | Study::S4)
    }
}

impl std::str::FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" | "1" => Ok(Study::S1),
            "S2" | "2" => Ok(Study::S2),
            "S3" | "3" => Ok(Study::S3),
            "S4" | "4" => Ok(Study::S4),
            other => Err(Error::Config(format!("unknown study '{other}' (expected S1..S4)"))),
        }
    }
}

impl std::fmt::Display for Study {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Parameters of one simulation design.
///
/// `marginal` drives the single-platform studies; `platforms` and
/// `noise_marginal` drive the multi-platform ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub study: Study,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub d: usize,
    pub ar_coefficient: f64,
    pub beta_low: f64,
    pub beta_high: f64,
    pub marginal: Marginal,
    pub platforms: Vec<Marginal>,
    pub noise_marginal: Marginal,
    pub replicates: usize,
    pub base_seed: u64,
    /// Draw the platform indices once per replicate instead of once per
    /// active response coordinate.
    pub shared_platform_ids: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::for_study(Study::S1)
    }
}

impl SimConfig {
    pub fn for_study(study: Study) -> Self {
        let multi = vec![
            Marginal::Pareto { shape: 10.0, mode: 1.0 },
            Marginal::Power { a: 5.0 },
            Marginal::Power { a: 5.0 },
        ];
        let base = Self {
            study,
            n: 200,
            p: 2000,
            q: 1,
            d: 1,
            ar_coefficient: 0.5,
            beta_low: 2.0,
            beta_high: 5.0,
            marginal: Marginal::Gaussian,
            platforms: multi,
            noise_marginal: Marginal::Power { a: 5.0 },
            replicates: 200,
            base_seed: 20240601,
            shared_platform_ids: false,
        };
        match study {
            Study::S1 => base,
            Study::S2 => Self {
                beta_low: 1.0,
                beta_high: 2.0,
                marginal: Marginal::Power { a: 5.0 },
                ..base
            },
            Study::S3 | Study::S4 => Self {
                q: 10,
                d: 3,
                beta_low: 1.0,
                beta_high: 2.0,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_low < self.beta_high) {
            return Err(Error::Config(format!(
                "beta range must satisfy low < high, got [{}, {}]",
                self.beta_low, self.beta_high
            )));
        }
        if !(self.ar_coefficient > -1.0 && self.ar_coefficient < 1.0) {
            return Err(Error::Config(format!(
                "AR coefficient must lie in (-1, 1), got {}",
                self.ar_coefficient
            )));
        }
        if self.n < 4 {
            return Err(Error::Config(format!("need n >= 4 subjects, got {}", self.n)));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        self.marginal.validate()?;
        self.noise_marginal.validate()?;
        match self.study {
            Study::S1 | Study::S2 => {
                if self.p < 13 {
                    return Err(Error::Config(format!(
                        "study {} needs p >= 13 (true features 1, 2, 12, 13), got {}",
                        self.study, self.p
                    )));
                }
                if self.d != 1 || self.q != 1 {
                    return Err(Error::Config(format!(
                        "study {} is single-platform with scalar response, got d = {}, q = {}",
                        self.study, self.d, self.q
                    )));
                }
            }
            Study::S3 | Study::S4 => {
                if self.p < 102 {
                    return Err(Error::Config(format!(
                        "study {} needs p >= 102 (true features 2, 3, 101, 102), got {}",
                        self.study, self.p
                    )));
                }
                if self.q < 3 {
                    return Err(Error::Config(format!(
                        "study {} needs q >= 3 response coordinates, got {}",
                        self.study, self.q
                    )));
                }
                if self.platforms.is_empty() || self.platforms.len() != self.d {
                    return Err(Error::Config(format!(
                        "study {} declares d = {} but lists {} platform marginals",
                        self.study,
                        self.d,
                        self.platforms.len()
                    )));
                }
                for m in &self.platforms {
                    m.validate()?;
                }
            }
        }
        Ok(())
    }
}
