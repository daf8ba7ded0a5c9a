//! Wasserstein dependence: squared-W2 transport cost from the joint empirical
//! measure of `(x_i, y_i)` to the product of its marginals.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::standardize;
use crate::error::{Error, Result};
use crate::transport::{
    multivariate_rank, ot_exact, sinkhorn_separable, squared_distances, DiscreteMeasure, OtSolver, SinkhornParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WdPreprocess {
    #[default]
    Standardize,
    Rank,
}

impl std::str::FromStr for WdPreprocess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standardize" | "std" => Ok(Self::Standardize),
            "rank" => Ok(Self::Rank),
            other => Err(Error::Config(format!("unknown WD preprocessing '{other}' (standardize|rank)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WdOptions {
    pub solver: OtSolver,
    pub preprocess: WdPreprocess,
    /// Sinkhorn epsilon as a fraction of the mean ground cost.
    pub epsilon_scale: f64,
    /// L1 marginal violation at which Sinkhorn stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WdOptions {
    fn default() -> Self {
        Self {
            solver: OtSolver::Auto,
            preprocess: WdPreprocess::Standardize,
            epsilon_scale: 0.1,
            tol: 1e-6,
            max_iter: 10_000,
        }
    }
}

impl WdOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_scale > 0.0) || !self.epsilon_scale.is_finite() {
            return Err(Error::Config(format!("WD epsilon scale must be positive, got {}", self.epsilon_scale)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("WD Sinkhorn needs tol > 0 and max_iter > 0".into()));
        }
        Ok(())
    }
}

fn is_constant(z: ArrayView2<'_, f64>) -> bool {
    z.nrows() == 0 || z.rows().into_iter().all(|r| r == z.row(0))
}

fn preprocess(z: ArrayView2<'_, f64>, how: WdPreprocess) -> Array2<f64> {
    match how {
        WdPreprocess::Standardize => standardize(z),
        WdPreprocess::Rank => multivariate_rank(z),
    }
}

/// Response-side state: processed response and its pairwise squared distances.
#[derive(Debug, Clone)]
pub(crate) struct PreparedWasserstein {
    cy: Array2<f64>,
    y: Array2<f64>,
    constant: bool,
    opts: WdOptions,
}

impl PreparedWasserstein {
    pub(crate) fn new(y: ArrayView2<'_, f64>, opts: WdOptions) -> Self {
        let constant = is_constant(y);
        let yp = preprocess(y, opts.preprocess);
        let cy = squared_distances(yp.view(), yp.view());
        Self {
            cy,
            y: yp,
            constant,
            opts,
        }
    }

    pub(crate) fn score(&self, x: ArrayView2<'_, f64>) -> Result<f64> {
        if self.constant || is_constant(x) {
            return Ok(0.0);
        }
        let n = x.nrows();
        let xp = preprocess(x, self.opts.preprocess);
        let cx = squared_distances(xp.view(), xp.view());
        if self.opts.solver.use_exact(n * n * n) {
            exact_cost(&xp, &self.y, &cx, &self.cy)
        } else {
            let mean = cx.mean().unwrap_or(0.0) + self.cy.mean().unwrap_or(0.0);
            let params = SinkhornParams {
                epsilon: self.opts.epsilon_scale * mean,
                max_iter: self.opts.max_iter,
                tol: self.opts.tol,
            };
            let a = Array1::from_elem(n, 1.0 / n as f64);
            let b = Array2::from_elem((n, n), 1.0 / (n * n) as f64);
            let out = sinkhorn_separable(a.view(), b.view(), cx.view(), self.cy.view(), params)?;
            if !out.converged {
                log::warn!(
                    "WD sinkhorn stopped after {} iterations with marginal violation {:.2e}",
                    out.iterations,
                    out.violation
                );
            }
            Ok(out.cost)
        }
    }
}

fn exact_cost(x: &Array2<f64>, y: &Array2<f64>, cx: &Array2<f64>, cy: &Array2<f64>) -> Result<f64> {
    let n = x.nrows();
    let joint = joint_points(x, y, |i| (i, i), n);
    let product = joint_points(x, y, |c| (c / n, c % n), n * n);
    let src = DiscreteMeasure::uniform(joint)?;
    let dst = DiscreteMeasure::uniform(product)?;
    let cost = Array2::from_shape_fn((n, n * n), |(i, c)| cx[[i, c / n]] + cy[[i, c % n]]);
    Ok(ot_exact(&src, &dst, cost.view())?.cost)
}

fn joint_points(x: &Array2<f64>, y: &Array2<f64>, idx: impl Fn(usize) -> (usize, usize), m: usize) -> Array2<f64> {
    let (d, q) = (x.ncols(), y.ncols());
    Array2::from_shape_fn((m, d + q), |(r, c)| {
        let (a, b) = idx(r);
        if c < d {
            x[[a, c]]
        } else {
            y[[b, c - d]]
        }
    })
}

/// WD-Screen utility: transport cost between the joint and product empirical
/// measures of the (preprocessed) blocks.
pub fn wd_utility(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, opts: &WdOptions) -> Result<f64> {
    if x.nrows() != y.nrows() {
        return Err(Error::Argument(format!("blocks have {} and {} rows", x.nrows(), y.nrows())));
    }
    opts.validate()?;
    PreparedWasserstein::new(y, *opts).score(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_point_identity_coupling() {
        // standardized (0,1) is (-1/sqrt2, 1/sqrt2); half of each joint atom
        // must move to an off-diagonal product atom at squared distance 2
        let x = array![[0.0], [1.0]];
        let v = wd_utility(x.view(), x.view(), &WdOptions::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn constant_block_gives_zero() {
        let x = array![[1.0], [1.0], [1.0]];
        let y = array![[0.0], [2.0], [5.0]];
        assert_eq!(wd_utility(x.view(), y.view(), &WdOptions::default()).unwrap(), 0.0);
        let rank = WdOptions {
            preprocess: WdPreprocess::Rank,
            ..Default::default()
        };
        assert_eq!(wd_utility(y.view(), x.view(), &rank).unwrap(), 0.0);
    }

    #[test]
    fn sinkhorn_close_to_exact() {
        let x = array![[0.3], [-1.0], [2.0], [0.7], [1.1], [-0.2]];
        let y = array![[1.0], [-0.5], [2.5], [0.1], [1.4], [0.0]];
        let exact = wd_utility(x.view(), y.view(), &WdOptions::default()).unwrap();
        let sk = WdOptions {
            solver: OtSolver::Sinkhorn,
            epsilon_scale: 0.01,
            max_iter: 200_000,
            ..Default::default()
        };
        let approx = wd_utility(x.view(), y.view(), &sk).unwrap();
        assert!(approx >= exact - 1e-6);
        assert!((approx - exact).abs() < 0.05 * exact.max(1e-3), "{approx} vs {exact}");
    }
}
