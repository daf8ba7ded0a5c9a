//! Production measures and solvers against the brute-force [`oracle`]
//! implementations on small random instances.

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{utility, DistanceTransform, MeasureKind, MeasureOptions};
use crate::oracle;
use crate::transport::{assignment_solve, ot_exact, DiscreteMeasure};

pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub cases: usize,
    pub max_abs_error: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn new(name: impl Into<String>, errors: &[f64]) -> Self {
        let max_abs_error = errors.iter().fold(0.0f64, |m, &e| if e.is_nan() { f64::NAN } else { m.max(e) });
        Self {
            name: name.into(),
            cases: errors.len(),
            passed: max_abs_error <= ORACLE_TOL,
            max_abs_error,
        }
    }
}

/// Gaussian draws; with `ties`, rounded to multiples of 0.5 so equal values occur.
fn block(rng: &mut ChaCha20Rng, n: usize, dim: usize, ties: bool) -> Array2<f64> {
    Array2::from_shape_fn((n, dim), |_| {
        let z: f64 = rng.sample(StandardNormal);
        if ties {
            (z * 2.0).round() / 2.0
        } else {
            z
        }
    })
}

fn reference(kind: MeasureKind, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    let xs: Vec<f64> = x.column(0).to_vec();
    let ys: Vec<f64> = y.column(0).to_vec();
    match kind {
        MeasureKind::Sis => oracle::pearson(&xs, &ys),
        MeasureKind::Sirs => oracle::sirs(&xs, &ys),
        MeasureKind::Rrcs => oracle::kendall(&xs, &ys),
        MeasureKind::DcSis => oracle::dcor(x, y),
        MeasureKind::DcRoSis => oracle::dc_rosis(&xs, &ys),
        MeasureKind::MrDcSis => oracle::mrdc(x, y),
        MeasureKind::ScSis => oracle::distance_correlation(x, y, DistanceTransform::NegExp),
        MeasureKind::PcScreen => oracle::projection_correlation(x, y),
        MeasureKind::BcorSis => oracle::ball_correlation(x, y),
        MeasureKind::WdScreen => oracle::wasserstein_dependence(x, y),
    }
}

/// Compares one measure with its oracle on `seeds` random instances of
/// `n` in `3..=6`. Multivariate-capable measures draw `d, q` in `1..=3`.
pub fn check_measure(kind: MeasureKind, seeds: u64, base_seed: u64) -> Result<OracleCheck> {
    let opts = MeasureOptions::default();
    // assignment-based ranks are only unique without ties
    let ties_ok = !matches!(kind, MeasureKind::MrDcSis | MeasureKind::WdScreen);
    let mut errors = Vec::with_capacity(seeds as usize);
    for s in 0..seeds {
        let mut rng = ChaCha20Rng::seed_from_u64(base_seed);
        rng.set_stream(s);
        let n = rng.gen_range(3..=6);
        let (d, q) = if kind.univariate_only() {
            (1, 1)
        } else {
            (rng.gen_range(1..=3), rng.gen_range(1..=3))
        };
        let ties = ties_ok && s % 3 == 0;
        let x = block(&mut rng, n, d, ties);
        let y = block(&mut rng, n, q, ties);
        let got = utility(kind, x.view(), y.view(), &opts)?;
        errors.push((got - reference(kind, x.view(), y.view())).abs());
    }
    Ok(OracleCheck::new(kind.name(), &errors))
}

/// `assignment_solve` against permutation enumeration for `m` in `1..=7`.
pub fn check_assignment(cases: u64, base_seed: u64) -> Result<OracleCheck> {
    let mut errors = Vec::with_capacity(cases as usize);
    for s in 0..cases {
        let mut rng = ChaCha20Rng::seed_from_u64(base_seed ^ 0xa55a);
        rng.set_stream(s);
        let m = rng.gen_range(1..=7);
        let integer = s % 4 == 0;
        let cost = Array2::from_shape_fn((m, m), |_| {
            if integer {
                rng.gen_range(0..5) as f64
            } else {
                rng.gen_range(-10.0..10.0)
            }
        });
        let (perm, c) = assignment_solve(cost.view())?;
        let (_, best) = oracle::assignment(cost.view());
        let recomputed: f64 = perm.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        let valid = sorted == (0..m).collect::<Vec<_>>();
        errors.push(if valid { (c - best).abs().max((recomputed - c).abs()) } else { f64::INFINITY });
    }
    Ok(OracleCheck::new("assignment", &errors))
}

/// `ot_exact` against basic-solution enumeration of the transport LP with
/// up to 4 atoms per side.
pub fn check_ot_exact(cases: u64, base_seed: u64) -> Result<OracleCheck> {
    let mut errors = Vec::with_capacity(cases as usize);
    for s in 0..cases {
        let mut rng = ChaCha20Rng::seed_from_u64(base_seed ^ 0x5aa5);
        rng.set_stream(s);
        let (m, k) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let weights = |rng: &mut ChaCha20Rng, len: usize| {
            let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.1..1.0)).collect();
            let t: f64 = w.iter().sum();
            Array1::from_iter(w.into_iter().map(|v| v / t))
        };
        let a = weights(&mut rng, m);
        let b = weights(&mut rng, k);
        let src = DiscreteMeasure::new(block(&mut rng, m, 2, false), a.clone())?;
        let dst = DiscreteMeasure::new(block(&mut rng, k, 2, false), b.clone())?;
        let cost = Array2::from_shape_fn((m, k), |(i, j)| {
            let (sp, dp) = (src.points(), dst.points());
            (&sp.row(i) - &dp.row(j)).mapv(|v| v * v).sum()
        });
        let plan = ot_exact(&src, &dst, cost.view())?;
        errors.push((plan.cost - oracle::transport_lp(a.as_slice().unwrap(), b.as_slice().unwrap(), cost.view())).abs());
    }
    Ok(OracleCheck::new("ot_exact", &errors))
}

/// The full suite: every measure, the assignment solver and the exact OT
/// solver.
pub fn run(seeds: u64, assignment_cases: u64, base_seed: u64) -> Result<Vec<OracleCheck>> {
    let mut out = Vec::new();
    for kind in MeasureKind::ALL {
        out.push(check_measure(kind, seeds, base_seed)?);
    }
    out.push(check_assignment(assignment_cases, base_seed)?);
    out.push(check_ot_exact(seeds, base_seed)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        for c in run(10, 50, 3).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }
}
