//! Discrete optimal transport: exact assignment and network-simplex solvers,
//! entropic Sinkhorn, and the assignment-based multivariate rank map.

mod assignment;
mod network_simplex;
mod rank;
mod sinkhorn;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

pub use assignment::assignment_solve;
pub use rank::{first_primes, halton, multivariate_rank, radical_inverse};
pub use sinkhorn::{sinkhorn, sinkhorn_separable, SeparableOutcome, SinkhornParams};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a measure.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Above this many source-target pairs the automatic solver switches from
/// network simplex to Sinkhorn.
pub const EXACT_PAIR_LIMIT: usize = 100_000;

/// A finitely supported probability measure: `m` atoms in `dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Array2<f64>,
    weights: Array1<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        if points.nrows() != weights.len() {
            return Err(Error::Argument(format!(
                "{} points but {} weights",
                points.nrows(),
                weights.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("measure has non-finite coordinates".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Argument("measure weights must be finite and non-negative".into()));
        }
        let total = weights.sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Argument(format!("measure weights sum to {total}, expected 1")));
        }
        Ok(Self { points, weights })
    }

    /// Equal weights `1/m` on each row of `points`.
    pub fn uniform(points: Array2<f64>) -> Result<Self> {
        let m = points.nrows();
        if m == 0 {
            return Err(Error::Argument("measure needs at least one atom".into()));
        }
        Self::new(points, Array1::from_elem(m, 1.0 / m as f64))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }
}

/// A coupling between two measures and its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub coupling: Array2<f64>,
    pub cost: f64,
}

impl TransportPlan {
    pub(crate) fn from_coupling(coupling: Array2<f64>, cost: ArrayView2<'_, f64>) -> Self {
        let total = (&coupling * &cost).sum();
        Self { coupling, cost: total }
    }

    /// Largest absolute deviation of the row / column sums from the given
    /// marginals.
    pub fn marginal_error(&self, src: ArrayView1<'_, f64>, dst: ArrayView1<'_, f64>) -> f64 {
        let rows = self.coupling.sum_axis(Axis(1));
        let cols = self.coupling.sum_axis(Axis(0));
        let r = rows.iter().zip(src).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = cols.iter().zip(dst).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }
}

pub(crate) fn check_cost(cost: ArrayView2<'_, f64>, m: usize, k: usize) -> Result<()> {
    if cost.dim() != (m, k) {
        return Err(Error::Argument(format!(
            "cost matrix is {:?}, expected {m}x{k}",
            cost.dim()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::Argument("cost matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Pairwise squared Euclidean distances between the atoms of two measures.
pub fn squared_euclidean_cost(src: &DiscreteMeasure, dst: &DiscreteMeasure) -> Array2<f64> {
    squared_distances(src.points(), dst.points())
}

pub(crate) fn squared_distances(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| {
        a.row(i)
            .iter()
            .zip(b.row(j).iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    })
}

/// Exact optimal transport by network simplex.
pub fn ot_exact(src: &DiscreteMeasure, dst: &DiscreteMeasure, cost: ArrayView2<'_, f64>) -> Result<TransportPlan> {
    let (m, k) = (src.len(), dst.len());
    check_cost(cost, m, k)?;
    let a = src.weights();
    let mut b = dst.weights().to_owned();
    // absorb the rounding residue so supplies and demands balance exactly
    let residue = a.sum() - b.sum();
    if residue.abs() > WEIGHT_TOL {
        return Err(Error::Argument(format!("measures have unequal mass (difference {residue})")));
    }
    if let Some(last) = b.iter_mut().rev().find(|w| **w > residue.abs()) {
        *last += residue;
    }
    let c = cost.as_standard_layout();
    let supply = a.to_vec();
    let sol = network_simplex::solve(&supply, b.as_slice().unwrap(), c.as_slice().unwrap());
    let coupling = Array2::from_shape_vec((m, k), sol.flow).expect("flow has m*k entries");
    Ok(TransportPlan {
        coupling,
        cost: sol.cost,
    })
}

/// Solver selection for general transport problems.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OtSolver {
    /// Exact up to [`EXACT_PAIR_LIMIT`] pairs, Sinkhorn beyond.
    #[default]
    Auto,
    Exact,
    Sinkhorn,
}

impl std::str::FromStr for OtSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "sinkhorn" => Ok(Self::Sinkhorn),
            other => Err(Error::Config(format!("unknown OT solver '{other}' (auto|exact|sinkhorn)"))),
        }
    }
}

impl OtSolver {
    pub fn use_exact(self, pairs: usize) -> bool {
        match self {
            OtSolver::Auto => pairs <= EXACT_PAIR_LIMIT,
            OtSolver::Exact => true,
            OtSolver::Sinkhorn => false,
        }
    }
}
