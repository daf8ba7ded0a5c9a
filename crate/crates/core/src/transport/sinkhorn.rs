//! Entropic optimal transport.
//!
//! [`sinkhorn`] works on an explicit cost matrix with log-domain potentials.
//! [`sinkhorn_separable`] handles targets laid out on a grid `(a, b)` whose
//! cost splits as `cx[i][a] + cy[i][b]`; the Gibbs kernel then factors and
//! every scaling step is a pair of dense matrix products.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use super::{DiscreteMeasure, TransportPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornParams {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Bound on the L1 marginal violation of the returned plan.
    pub tol: f64,
}

impl SinkhornParams {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_iter: 100_000,
            tol: 1e-9,
        }
    }
}

fn log_sum_exp<I: Iterator<Item = f64> + Clone>(it: I) -> f64 {
    let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + it.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Log-domain Sinkhorn between `src` and `dst` under `cost`.
///
/// Column marginals of the returned plan are exact up to rounding; iteration
/// stops once the row-marginal L1 violation is at most `params.tol`.
pub fn sinkhorn(
    src: &DiscreteMeasure,
    dst: &DiscreteMeasure,
    cost: ArrayView2<'_, f64>,
    params: SinkhornParams,
) -> Result<TransportPlan> {
    let (m, k) = (src.len(), dst.len());
    super::check_cost(cost, m, k)?;
    if !(params.epsilon > 0.0) || !params.epsilon.is_finite() {
        return Err(Error::Argument(format!("epsilon must be positive, got {}", params.epsilon)));
    }
    let (coupling, _) = sinkhorn_log(src.weights(), dst.weights(), cost, params)?;
    Ok(TransportPlan::from_coupling(coupling, cost))
}

pub(crate) fn sinkhorn_log(
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    cost: ArrayView2<'_, f64>,
    params: SinkhornParams,
) -> Result<(Array2<f64>, usize)> {
    let eps = params.epsilon;
    let (m, k) = cost.dim();
    let log_a: Vec<f64> = a.iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();
    let log_b: Vec<f64> = b.iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();
    let mut f = vec![0.0f64; m];
    let mut g = vec![0.0f64; k];
    let c = cost.as_standard_layout();
    let ct = cost.t().as_standard_layout().to_owned();

    let mut violation = f64::INFINITY;
    for it in 0..params.max_iter {
        for i in 0..m {
            f[i] = if log_a[i] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                let row = c.row(i);
                eps * log_a[i] - eps * log_sum_exp(row.iter().zip(&g).map(|(&cij, &gj)| (gj - cij) / eps))
            };
        }
        for j in 0..k {
            g[j] = if log_b[j] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                let col = ct.row(j);
                eps * log_b[j] - eps * log_sum_exp(col.iter().zip(&f).map(|(&cij, &fi)| (fi - cij) / eps))
            };
        }
        if it % 10 == 9 || it + 1 == params.max_iter {
            violation = (0..m)
                .map(|i| {
                    let row = c.row(i);
                    let s: f64 = row
                        .iter()
                        .zip(&g)
                        .map(|(&cij, &gj)| plan_entry(f[i], gj, cij, eps))
                        .sum();
                    (s - a[i]).abs()
                })
                .sum();
            if violation <= params.tol {
                let plan = Array2::from_shape_fn((m, k), |(i, j)| plan_entry(f[i], g[j], c[[i, j]], eps));
                return Ok((plan, it + 1));
            }
        }
    }
    Err(Error::Convergence {
        iterations: params.max_iter,
        violation,
    })
}

#[inline]
fn plan_entry(f: f64, g: f64, c: f64, eps: f64) -> f64 {
    if f == f64::NEG_INFINITY || g == f64::NEG_INFINITY {
        0.0
    } else {
        ((f + g - c) / eps).exp()
    }
}

/// Result of [`sinkhorn_separable`]; the `n x (n1 * n2)` plan is never formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableOutcome {
    pub cost: f64,
    pub violation: f64,
    pub iterations: usize,
    /// False when `max_iter` ran out before the violation reached `tol`.
    pub converged: bool,
}

/// Sinkhorn from `n` source atoms with weights `a` to an `n1 x n2` grid of
/// target atoms with weights `b`, where moving source `i` to grid cell `(s, t)`
/// costs `cx[i][s] + cy[i][t]`.
///
/// Runs in the kernel domain with dense products (O(n * n1 * n2) per
/// iteration). If the Gibbs kernel underflows it falls back to the log-domain
/// solver on the materialized cost. When `max_iter` runs out the last iterate
/// is returned with `converged == false`; its target marginal is exact.
pub fn sinkhorn_separable(
    a: ArrayView1<'_, f64>,
    b: ArrayView2<'_, f64>,
    cx: ArrayView2<'_, f64>,
    cy: ArrayView2<'_, f64>,
    params: SinkhornParams,
) -> Result<SeparableOutcome> {
    let n = a.len();
    let (n1, n2) = b.dim();
    if cx.dim() != (n, n1) || cy.dim() != (n, n2) {
        return Err(Error::Argument(format!(
            "separable cost shapes {:?} / {:?} do not match {n} sources and a {n1}x{n2} grid",
            cx.dim(),
            cy.dim()
        )));
    }
    if !(params.epsilon > 0.0) || !params.epsilon.is_finite() {
        return Err(Error::Argument(format!("epsilon must be positive, got {}", params.epsilon)));
    }
    match separable_kernel(a, b, cx, cy, params)? {
        Some(out) => Ok(out),
        None => {
            log::debug!("separable sinkhorn kernel underflow, falling back to log domain");
            let cost = Array2::from_shape_fn((n, n1 * n2), |(i, c)| cx[[i, c / n2]] + cy[[i, c % n2]]);
            let bflat = Array1::from_iter(b.iter().copied());
            let (plan, iterations) = sinkhorn_log(a, bflat.view(), cost.view(), params)?;
            let total = (&plan * &cost).sum();
            let violation = plan
                .sum_axis(Axis(1))
                .iter()
                .zip(a.iter())
                .map(|(s, w)| (s - w).abs())
                .sum();
            Ok(SeparableOutcome {
                cost: total,
                violation,
                iterations,
                converged: true,
            })
        }
    }
}

/// Returns `Ok(None)` on kernel underflow.
fn separable_kernel(
    a: ArrayView1<'_, f64>,
    b: ArrayView2<'_, f64>,
    cx: ArrayView2<'_, f64>,
    cy: ArrayView2<'_, f64>,
    params: SinkhornParams,
) -> Result<Option<SeparableOutcome>> {
    let eps = params.epsilon;
    let n = a.len();
    let kx = cx.mapv(|c| (-c / eps).exp());
    let ky = cy.mapv(|c| (-c / eps).exp());
    let ky_t = ky.t();

    let mut u = Array1::<f64>::ones(n);
    let mut v = Array2::<f64>::ones(b.raw_dim());
    let mut kv = Array1::<f64>::zeros(n);
    let mut violation = f64::INFINITY;

    for it in 0..params.max_iter {
        // (K v)_i = sum_s kx[i,s] * (v ky^T)[s,i]
        let w = v.dot(&ky_t);
        Zip::from(&mut kv)
            .and(kx.rows())
            .and(w.columns())
            .for_each(|o, kr, wc| *o = kr.dot(&wc));
        if kv.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Ok(None);
        }
        if it > 0 {
            violation = u.iter().zip(&kv).zip(a).map(|((ui, ki), ai)| (ui * ki - ai).abs()).sum();
            if violation <= params.tol {
                let cost = separable_cost(&u, &v, &kx, &ky, cx, cy);
                return Ok(Some(SeparableOutcome {
                    cost,
                    violation,
                    iterations: it,
                    converged: true,
                }));
            }
        }
        Zip::from(&mut u).and(&kv).and(a).for_each(|ui, &ki, &ai| *ui = ai / ki);
        // (K^T u)[s,t] = sum_i kx[i,s] u_i ky[i,t]
        let mut scaled = ky.clone();
        Zip::from(scaled.rows_mut()).and(&u).for_each(|mut r, &ui| r *= ui);
        let ktu = kx.t().dot(&scaled);
        let mut bad = false;
        Zip::from(&mut v).and(&ktu).and(b).for_each(|vi, &t, &bi| {
            if bi == 0.0 {
                *vi = 0.0;
            } else if t > 0.0 && t.is_finite() {
                *vi = bi / t;
            } else {
                bad = true;
            }
        });
        if bad {
            return Ok(None);
        }
    }
    Ok(Some(SeparableOutcome {
        cost: separable_cost(&u, &v, &kx, &ky, cx, cy),
        violation,
        iterations: params.max_iter,
        converged: false,
    }))
}

fn separable_cost(
    u: &Array1<f64>,
    v: &Array2<f64>,
    kx: &Array2<f64>,
    ky: &Array2<f64>,
    cx: ArrayView2<'_, f64>,
    cy: ArrayView2<'_, f64>,
) -> f64 {
    let kcx = kx * &cx;
    let kcy = ky * &cy;
    let w = v.dot(&ky.t());
    let wc = v.dot(&kcy.t());
    let mut total = 0.0;
    for i in 0..u.len() {
        let x_part = kcx.row(i).dot(&w.column(i));
        let y_part = kx.row(i).dot(&wc.column(i));
        total += u[i] * (x_part + y_part);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_atoms_forced_coupling() {
        let src = DiscreteMeasure::uniform(array![[0.0, 0.0]]).unwrap();
        let dst = DiscreteMeasure::uniform(array![[3.0, 4.0]]).unwrap();
        let cost = crate::transport::squared_euclidean_cost(&src, &dst);
        for eps in [1e-3, 1.0, 100.0] {
            let plan = sinkhorn(&src, &dst, cost.view(), SinkhornParams::new(eps)).unwrap();
            assert!((plan.cost - 25.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        let src = DiscreteMeasure::uniform(array![[0.0]]).unwrap();
        let cost = array![[0.0]];
        assert!(sinkhorn(&src, &src, cost.view(), SinkhornParams::new(0.0)).is_err());
    }

    #[test]
    fn convergence_error_reports_violation() {
        let src = DiscreteMeasure::uniform(array![[0.0], [1.0], [2.0]]).unwrap();
        let dst = DiscreteMeasure::uniform(array![[0.5], [3.0]]).unwrap();
        let cost = crate::transport::squared_euclidean_cost(&src, &dst);
        let params = SinkhornParams {
            epsilon: 1e-3,
            max_iter: 3,
            tol: 1e-15,
        };
        match sinkhorn(&src, &dst, cost.view(), params) {
            Err(Error::Convergence { iterations, violation }) => {
                assert_eq!(iterations, 3);
                assert!(violation.is_finite());
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn separable_matches_dense() {
        let cx = array![[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]];
        let cy = array![[0.0, 2.0], [2.0, 0.0], [1.0, 1.0]];
        let a = Array1::from_elem(3, 1.0 / 3.0);
        let b = Array2::from_elem((3, 2), 1.0 / 6.0);
        let params = SinkhornParams {
            epsilon: 0.5,
            max_iter: 10_000,
            tol: 1e-12,
        };
        let sep = sinkhorn_separable(a.view(), b.view(), cx.view(), cy.view(), params).unwrap();
        let cost = Array2::from_shape_fn((3, 6), |(i, c)| cx[[i, c / 2]] + cy[[i, c % 2]]);
        let bflat = Array1::from_elem(6, 1.0 / 6.0);
        let (plan, _) = sinkhorn_log(a.view(), bflat.view(), cost.view(), params).unwrap();
        let dense = (&plan * &cost).sum();
        assert!((sep.cost - dense).abs() < 1e-9, "{} vs {}", sep.cost, dense);
        assert!(sep.converged);

        let short = SinkhornParams { max_iter: 2, ..params };
        let cut = sinkhorn_separable(a.view(), b.view(), cx.view(), cy.view(), short).unwrap();
        assert!(!cut.converged && cut.violation > params.tol && cut.cost.is_finite());
    }

    #[test]
    fn separable_underflow_falls_back() {
        let cx = array![[0.0, 900.0], [900.0, 0.0]];
        let cy = array![[0.0, 900.0], [900.0, 0.0]];
        let a = Array1::from_elem(2, 0.5);
        let b = Array2::from_elem((2, 2), 0.25);
        let params = SinkhornParams {
            epsilon: 0.5,
            max_iter: 100_000,
            tol: 1e-9,
        };
        let out = sinkhorn_separable(a.view(), b.view(), cx.view(), cy.view(), params).unwrap();
        // exact optimum: each source keeps its diagonal cell and splits the
        // rest across one off-diagonal cell at cost 900
        assert!((out.cost - 450.0).abs() < 1.0, "{}", out.cost);
    }
}
