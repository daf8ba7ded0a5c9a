//! Distance correlation (V-statistic) and its bounded-kernel variant.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

/// Transform applied to pairwise distances before double-centering.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceTransform {
    /// Plain Euclidean distance: ordinary distance correlation.
    Identity,
    /// `g(u) = 1 - exp(-u / s)` with `s` the block's mean off-diagonal
    /// distance, so the statistic is scale free.
    #[default]
    NegExp,
    /// `g(u) = 1 - exp(-u)` on raw distances.
    NegExpRaw,
}

impl std::str::FromStr for DistanceTransform {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "id" | "linear" => Ok(Self::Identity),
            "negexp" | "neg-exp" | "exp" => Ok(Self::NegExp),
            "negexp-raw" | "neg-exp-raw" => Ok(Self::NegExpRaw),
            other => Err(crate::Error::Config(format!(
                "unknown SC transform '{other}' (identity|negexp|negexp-raw)"
            ))),
        }
    }
}

/// Pairwise Euclidean distances between rows, passed through `transform`.
pub(crate) fn distance_matrix(x: ArrayView2<'_, f64>, transform: DistanceTransform) -> Array2<f64> {
    let n = x.nrows();
    let mut a = Array2::<f64>::zeros((n, n));
    if x.ncols() == 1 {
        let col = x.column(0);
        for i in 0..n {
            for j in i + 1..n {
                let d = (col[i] - col[j]).abs();
                a[[i, j]] = d;
                a[[j, i]] = d;
            }
        }
    } else {
        for i in 0..n {
            let xi = x.row(i);
            for j in i + 1..n {
                let d = xi
                    .iter()
                    .zip(x.row(j).iter())
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                a[[i, j]] = d;
                a[[j, i]] = d;
            }
        }
    }
    match transform {
        DistanceTransform::Identity => {}
        DistanceTransform::NegExp => {
            if n > 1 {
                let scale = a.sum() / (n * (n - 1)) as f64;
                if scale > 0.0 {
                    a.mapv_inplace(|d| 1.0 - (-d / scale).exp());
                }
            }
        }
        DistanceTransform::NegExpRaw => a.mapv_inplace(|d| 1.0 - (-d).exp()),
    }
    a
}

/// In-place double-centering of a symmetric matrix.
pub(crate) fn double_center(a: &mut Array2<f64>) {
    let n = a.nrows();
    let nf = n as f64;
    let rows: Vec<f64> = a.rows().into_iter().map(|r| r.sum() / nf).collect();
    let grand = rows.iter().sum::<f64>() / nf;
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] += grand - rows[i] - rows[j];
        }
    }
}

/// `sum(A~ * B~)` and `sum(A~ * A~)` for raw symmetric `a` against an already
/// centered `b`.
pub(crate) fn centered_products(a: &Array2<f64>, b_centered: &Array2<f64>) -> (f64, f64) {
    let n = a.nrows();
    let nf = n as f64;
    let mut cross = 0.0;
    let mut sq = 0.0;
    let mut row_sq = 0.0;
    let mut grand = 0.0;
    for (ra, rb) in a.rows().into_iter().zip(b_centered.rows()) {
        let mut rs = 0.0;
        for (&x, &y) in ra.iter().zip(rb.iter()) {
            cross += x * y;
            sq += x * x;
            rs += x;
        }
        let mean = rs / nf;
        row_sq += mean * mean;
        grand += mean;
    }
    grand /= nf;
    let self_term = sq - 2.0 * nf * row_sq + nf * nf * grand * grand;
    (cross, self_term)
}

/// Response-side state: centered distance matrix and its squared norm.
#[derive(Debug, Clone)]
pub(crate) struct PreparedDistance {
    b: Array2<f64>,
    b_norm: f64,
    transform: DistanceTransform,
}

impl PreparedDistance {
    pub(crate) fn new(y: ArrayView2<'_, f64>, transform: DistanceTransform) -> Self {
        let mut b = distance_matrix(y, transform);
        double_center(&mut b);
        let b_norm = b.iter().map(|v| v * v).sum();
        Self { b, b_norm, transform }
    }

    pub(crate) fn score(&self, x: ArrayView2<'_, f64>) -> f64 {
        let a = distance_matrix(x, self.transform);
        let (cross, a_norm) = centered_products(&a, &self.b);
        correlation_from_sums(cross, a_norm, self.b_norm)
    }
}

/// `sqrt(cov^2) / (var_x^2 var_y^2)^(1/4)`, 0 when a variance vanishes. The
/// common `1/n^2` factor cancels.
pub(crate) fn correlation_from_sums(cross: f64, x_norm: f64, y_norm: f64) -> f64 {
    let den = x_norm * y_norm;
    if !(den > 0.0) || !den.is_finite() {
        return 0.0;
    }
    (cross.max(0.0) / den.sqrt()).sqrt().min(1.0)
}

/// DC-SIS utility: sample distance correlation between two blocks with the
/// same number of rows.
pub fn dcor_utility(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    assert_eq!(x.nrows(), y.nrows(), "blocks must have equal row counts");
    PreparedDistance::new(y, DistanceTransform::Identity).score(x)
}

/// SC-SIS utility: distance correlation on transformed distances.
pub fn sc_utility(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, transform: DistanceTransform) -> f64 {
    assert_eq!(x.nrows(), y.nrows(), "blocks must have equal row counts");
    PreparedDistance::new(y, transform).score(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn self_dependence_is_one() {
        let x = array![[0.1, 2.0], [1.5, -1.0], [0.7, 0.3], [2.2, 1.1], [-0.4, 0.0]];
        assert!((dcor_utility(x.view(), x.view()) - 1.0).abs() < 1e-12);
        assert!((sc_utility(x.view(), x.view(), DistanceTransform::NegExp) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_block_is_zero() {
        let x = array![[1.0], [1.0], [1.0], [1.0]];
        let y = array![[0.3], [1.0], [-2.0], [0.5]];
        assert_eq!(dcor_utility(x.view(), y.view()), 0.0);
        assert_eq!(sc_utility(x.view(), y.view(), DistanceTransform::NegExp), 0.0);
        assert_eq!(dcor_utility(y.view(), x.view()), 0.0);
    }

    #[test]
    fn identity_transform_reduces_to_dcor() {
        let x = array![[0.1], [1.5], [0.7], [2.2], [-0.4], [3.0]];
        let y = array![[1.0, 0.0], [0.2, 0.1], [0.5, 0.5], [2.0, -1.0], [0.0, 0.3], [1.1, 1.1]];
        let a = dcor_utility(x.view(), y.view());
        let b = sc_utility(x.view(), y.view(), DistanceTransform::Identity);
        assert!((a - b).abs() < 1e-12);
    }
}
