//! Multivariate ranks via optimal assignment onto a Halton reference set.

use ndarray::{Array2, ArrayView2};

use super::assignment::solve_dense;

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113, 127, 131,
];

/// The first `dim` primes.
pub fn first_primes(dim: usize) -> Vec<u32> {
    if dim <= PRIMES.len() {
        return PRIMES[..dim].to_vec();
    }
    let mut out = PRIMES.to_vec();
    let mut c = *out.last().unwrap() + 2;
    while out.len() < dim {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 2;
    }
    out
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * f;
        index /= b;
        f *= inv;
    }
    out
}

/// Halton points `1..=n` in `(0,1)^dim`, one per row.
pub fn halton(n: usize, dim: usize) -> Array2<f64> {
    let bases = first_primes(dim);
    Array2::from_shape_fn((n, dim), |(i, c)| radical_inverse(i as u64 + 1, bases[c]))
}

/// Ordinal ranks `1..=n`, ties broken by original position.
pub(crate) fn ordinal_ranks(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; x.len()];
    for (r, &i) in idx.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Maps each row of an `n x dim` sample to a reference point.
///
/// For `dim == 1` row `i` goes to `rank(x_i) / n` (ties by row order). For
/// `dim >= 2` rows are matched to the first `n` Halton points by the
/// assignment minimizing total squared Euclidean distance.
pub fn multivariate_rank(m: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, dim) = m.dim();
    if n == 0 || dim == 0 {
        return Array2::zeros((n, dim));
    }
    if dim == 1 {
        let col: Vec<f64> = m.column(0).to_vec();
        let ranks = ordinal_ranks(&col);
        return Array2::from_shape_fn((n, 1), |(i, _)| ranks[i] as f64 / n as f64);
    }
    let grid = halton(n, dim);
    let cost = rank_cost(m, grid.view());
    let perm = solve_dense(&cost, n);
    Array2::from_shape_fn((n, dim), |(i, c)| grid[[perm[i], c]])
}

/// Row-major squared-distance matrix between sample rows and grid rows.
pub(crate) fn rank_cost(m: ArrayView2<'_, f64>, grid: ArrayView2<'_, f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut cost = Vec::with_capacity(n * grid.nrows());
    for x in m.rows() {
        for h in grid.rows() {
            cost.push(x.iter().zip(h.iter()).map(|(a, b)| (a - b) * (a - b)).sum());
        }
    }
    cost
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn univariate_ranks() {
        let r = multivariate_rank(array![[3.2], [-1.0], [7.0]].view());
        assert_eq!(r, array![[2.0 / 3.0], [1.0 / 3.0], [1.0]]);
    }

    #[test]
    fn sorted_input_is_identity_ranks() {
        let x = Array2::from_shape_fn((5, 1), |(i, _)| i as f64);
        let r = multivariate_rank(x.view());
        for i in 0..5 {
            assert_eq!(r[[i, 0]], (i + 1) as f64 / 5.0);
        }
    }

    #[test]
    fn ties_by_row_order() {
        let r = multivariate_rank(array![[1.0], [1.0], [0.0]].view());
        assert_eq!(r, array![[2.0 / 3.0], [1.0], [1.0 / 3.0]]);
    }

    #[test]
    fn halton_first_points() {
        let h = halton(4, 2);
        assert_eq!(h, array![[0.5, 1.0 / 3.0], [0.25, 2.0 / 3.0], [0.75, 1.0 / 9.0], [0.125, 4.0 / 9.0]]);
        assert_eq!(first_primes(12)[10..], [31, 37]);
        assert_eq!(first_primes(34)[32..], [137, 139]);
    }

    #[test]
    fn output_uses_each_grid_point_once() {
        let x = Array2::from_shape_fn((9, 3), |(i, c)| ((i * 7 + c * 3) % 11) as f64 * 0.3 - (c as f64));
        let r = multivariate_rank(x.view());
        let grid = halton(9, 3);
        let mut used = vec![false; 9];
        for row in r.rows() {
            let k = grid.rows().into_iter().position(|g| g == row).expect("row is a grid point");
            assert!(!used[k]);
            used[k] = true;
        }
    }
}
