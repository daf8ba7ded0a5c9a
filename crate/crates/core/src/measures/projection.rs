//! Projection correlation (V-statistic form).
//!
//! For every anchor `r` the angle between `x_k - x_r` and `x_l - x_r` forms an
//! `n x n` matrix that is double-centered per anchor; the covariance is the
//! mean over all `(k, l, r)` of the elementwise product of the two centered
//! tensors.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use ndarray::{Array2, ArrayView2};

use super::distance::{centered_products, correlation_from_sums, double_center};

/// Angle matrix at anchor `r`, written into `out` (`n x n`). Pairs involving
/// a zero difference get angle 0, as does the diagonal.
fn angle_matrix(z: ArrayView2<'_, f64>, r: usize, unit: &mut Array2<f64>, nonzero: &mut [bool], out: &mut Array2<f64>) {
    let (n, dim) = z.dim();
    let zr = z.row(r);
    for k in 0..n {
        let mut norm = 0.0;
        for c in 0..dim {
            let d = z[[k, c]] - zr[c];
            unit[[k, c]] = d;
            norm += d * d;
        }
        nonzero[k] = norm > 0.0;
        if nonzero[k] {
            let inv = 1.0 / norm.sqrt();
            for c in 0..dim {
                unit[[k, c]] *= inv;
            }
        }
    }
    for k in 0..n {
        out[[k, k]] = 0.0;
        for l in k + 1..n {
            let angle = if nonzero[k] && nonzero[l] {
                // 2 atan2(|u - v|, |u + v|) stays accurate near 0 and pi
                let (mut diff, mut sum) = (0.0, 0.0);
                for c in 0..dim {
                    let (u, v) = (unit[[k, c]], unit[[l, c]]);
                    diff += (u - v) * (u - v);
                    sum += (u + v) * (u + v);
                }
                2.0 * diff.sqrt().atan2(sum.sqrt())
            } else {
                0.0
            };
            out[[k, l]] = angle;
            out[[l, k]] = angle;
        }
    }
}

/// Per-anchor centered angle matrices of the response.
#[derive(Debug)]
struct AngleTensor {
    centered: Vec<Array2<f64>>,
    norm: f64,
}

impl AngleTensor {
    fn new(y: ArrayView2<'_, f64>) -> Self {
        let (n, q) = y.dim();
        let mut unit = Array2::zeros((n, q));
        let mut nonzero = vec![false; n];
        let mut centered = Vec::with_capacity(n);
        let mut norm = 0.0;
        for r in 0..n {
            let mut b = Array2::zeros((n, n));
            angle_matrix(y, r, &mut unit, &mut nonzero, &mut b);
            double_center(&mut b);
            norm += b.iter().map(|v| v * v).sum::<f64>();
            centered.push(b);
        }
        Self { centered, norm }
    }
}

/// Per-anchor sign vectors of a univariate sample: `t_k = sign(x_k - x_r)`.
/// The angle matrix is then `(pi/2) (m m^T - t t^T)` with `m = |t|`.
fn sign_sums(x: &[f64], r: usize, t: &mut [f64], m: &mut [f64]) {
    let xr = x[r];
    for k in 0..x.len() {
        let s = if x[k] > xr {
            1.0
        } else if x[k] < xr {
            -1.0
        } else {
            0.0
        };
        t[k] = s;
        m[k] = s.abs();
    }
}

fn centered_dot(a: &[f64], b: &[f64], sa: f64, sb: f64, n: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() - sa * sb / n
}

/// Returns `(cross, x_self, y_self)` sums for univariate `x`, `y` in O(n^2).
fn univariate_sums(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len();
    let nf = n as f64;
    let (mut tx, mut mx, mut ty, mut my) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut cross, mut xs, mut ys) = (0.0, 0.0, 0.0);
    for r in 0..n {
        sign_sums(x, r, &mut tx, &mut mx);
        sign_sums(y, r, &mut ty, &mut my);
        let (stx, smx, sty, smy) = (tx.iter().sum(), mx.iter().sum(), ty.iter().sum(), my.iter().sum());
        let mm = centered_dot(&mx, &my, smx, smy, nf);
        let mt = centered_dot(&mx, &ty, smx, sty, nf);
        let tm = centered_dot(&tx, &my, stx, smy, nf);
        let tt = centered_dot(&tx, &ty, stx, sty, nf);
        cross += mm * mm - mt * mt - tm * tm + tt * tt;
        let xmm = centered_dot(&mx, &mx, smx, smx, nf);
        let xmt = centered_dot(&mx, &tx, smx, stx, nf);
        let xtt = centered_dot(&tx, &tx, stx, stx, nf);
        xs += xmm * xmm - 2.0 * xmt * xmt + xtt * xtt;
        let ymm = centered_dot(&my, &my, smy, smy, nf);
        let ymt = centered_dot(&my, &ty, smy, sty, nf);
        let ytt = centered_dot(&ty, &ty, sty, sty, nf);
        ys += ymm * ymm - 2.0 * ymt * ymt + ytt * ytt;
    }
    let s = FRAC_PI_2 * FRAC_PI_2;
    (cross * s, xs * s, ys * s)
}

#[derive(Debug)]
pub(crate) struct PreparedProjection {
    y: Array2<f64>,
    tensor: OnceLock<AngleTensor>,
}

impl PreparedProjection {
    pub(crate) fn new(y: ArrayView2<'_, f64>) -> Self {
        Self {
            y: y.to_owned(),
            tensor: OnceLock::new(),
        }
    }

    pub(crate) fn score(&self, x: ArrayView2<'_, f64>) -> f64 {
        if x.ncols() == 1 && self.y.ncols() == 1 {
            let xs: Vec<f64> = x.column(0).to_vec();
            let ys: Vec<f64> = self.y.column(0).to_vec();
            let (cross, sx, sy) = univariate_sums(&xs, &ys);
            return correlation_from_sums(cross, sx, sy);
        }
        self.score_general(x)
    }

    fn score_general(&self, x: ArrayView2<'_, f64>) -> f64 {
        let (n, d) = x.dim();
        let tensor = self.tensor.get_or_init(|| AngleTensor::new(self.y.view()));
        let mut unit = Array2::zeros((n, d));
        let mut nonzero = vec![false; n];
        let mut a = Array2::zeros((n, n));
        let (mut cross, mut sx) = (0.0, 0.0);
        for r in 0..n {
            angle_matrix(x, r, &mut unit, &mut nonzero, &mut a);
            let (c, s) = centered_products(&a, &tensor.centered[r]);
            cross += c;
            sx += s;
        }
        correlation_from_sums(cross, sx, tensor.norm)
    }
}

/// PC-Screen utility: sample projection correlation.
pub fn pc_utility(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    assert_eq!(x.nrows(), y.nrows(), "blocks must have equal row counts");
    PreparedProjection::new(y).score(x)
}

/// Same statistic, always through the general angle-tensor path.
#[cfg(test)]
pub(crate) fn pc_utility_general(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    PreparedProjection::new(y).score_general(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn univariate_fast_path_matches_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [4, 7, 12] {
            let x = Array2::from_shape_fn((n, 1), |_| rng.gen_range(-2.0..2.0));
            let mut y = Array2::from_shape_fn((n, 1), |_| rng.gen_range(-2.0..2.0));
            y[[1, 0]] = y[[0, 0]]; // a tie
            let fast = pc_utility(x.view(), y.view());
            let general = pc_utility_general(x.view(), y.view());
            assert!((fast - general).abs() < 1e-12, "{fast} vs {general}");
        }
    }

    #[test]
    fn self_dependence_and_rotation() {
        let x = array![[0.1, 2.0], [1.5, -1.0], [0.7, 0.3], [2.2, 1.1], [-0.4, 0.0], [0.9, 0.8]];
        assert!((pc_utility(x.view(), x.view()) - 1.0).abs() < 1e-12);
        let y = array![[1.0], [0.2], [0.5], [2.0], [0.0], [0.4]];
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let rot = Array2::from_shape_fn((6, 2), |(i, j)| {
            if j == 0 {
                c * x[[i, 0]] - s * x[[i, 1]]
            } else {
                s * x[[i, 0]] + c * x[[i, 1]]
            }
        });
        let a = pc_utility(x.view(), y.view());
        let b = pc_utility(rot.view(), y.view());
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn constant_is_zero() {
        let x = array![[1.0], [1.0], [1.0], [1.0]];
        let y = array![[0.3], [1.0], [-2.0], [0.5]];
        assert_eq!(pc_utility(x.view(), y.view()), 0.0);
    }
}
