//! Ball correlation (V-statistic form).
//!
//! For anchor `i`, `rank_i(k)` counts the points whose distance to `x_i` is at
//! most `|x_k - x_i|`, so `Delta_X(i, j) = rank_i(j) / n`. The joint term
//! `Delta_XY(i, j)` counts points inside both balls and is accumulated with a
//! Fenwick tree over the response ranks while sweeping the predictor balls
//! outward.

use ndarray::ArrayView2;

use super::distance::correlation_from_sums;

/// Per-anchor ball ordering of a sample.
struct BallOrder {
    n: usize,
    dim1: Option<(Vec<f64>, Vec<usize>, Vec<usize>)>,
}

impl BallOrder {
    fn new(z: ArrayView2<'_, f64>) -> Self {
        let n = z.nrows();
        let dim1 = (z.ncols() == 1).then(|| {
            let col: Vec<f64> = z.column(0).to_vec();
            let mut sorted: Vec<usize> = (0..n).collect();
            sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            let mut pos = vec![0; n];
            for (p, &k) in sorted.iter().enumerate() {
                pos[k] = p;
            }
            (col, sorted, pos)
        });
        Self { n, dim1 }
    }

    /// Fills `order` with the points by increasing distance from anchor `i`
    /// and `dist` with each point's distance key (squared distance in the
    /// general case).
    fn sweep(&self, z: ArrayView2<'_, f64>, i: usize, order: &mut Vec<usize>, dist: &mut [f64]) {
        order.clear();
        match &self.dim1 {
            Some((col, sorted, pos)) => {
                let xi = col[i];
                for k in 0..self.n {
                    dist[k] = (col[k] - xi).abs();
                }
                let p = pos[i];
                order.push(i);
                let (mut left, mut right) = (p, p + 1);
                while left > 0 || right < self.n {
                    let take_left = if left == 0 {
                        false
                    } else if right == self.n {
                        true
                    } else {
                        dist[sorted[left - 1]] <= dist[sorted[right]]
                    };
                    if take_left {
                        left -= 1;
                        order.push(sorted[left]);
                    } else {
                        order.push(sorted[right]);
                        right += 1;
                    }
                }
            }
            None => {
                let zi = z.row(i);
                for k in 0..self.n {
                    dist[k] = z.row(k).iter().zip(zi.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                }
                order.extend(0..self.n);
                order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
            }
        }
    }

    /// Upper-tie ranks (`#{l : d_l <= d_k}`) from a sweep.
    fn ranks(order: &[usize], dist: &[f64], out: &mut [u32]) {
        let n = order.len();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && dist[order[end]] == dist[order[start]] {
                end += 1;
            }
            for &k in &order[start..end] {
                out[k] = end as u32;
            }
            start = end;
        }
    }
}

struct Fenwick(Vec<u32>);

impl Fenwick {
    fn clear(&mut self) {
        self.0.iter_mut().for_each(|v| *v = 0);
    }

    fn add(&mut self, mut i: usize) {
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Response-side state: per-anchor ball ranks and the self term.
#[derive(Debug, Clone)]
pub(crate) struct PreparedBall {
    n: usize,
    ranks: Vec<u32>,
    self_term: f64,
}

impl PreparedBall {
    pub(crate) fn new(y: ArrayView2<'_, f64>) -> Self {
        let n = y.nrows();
        let ball = BallOrder::new(y);
        let mut ranks = vec![0u32; n * n];
        let mut order = Vec::with_capacity(n);
        let mut dist = vec![0.0; n];
        let nf = n as f64;
        let mut self_term = 0.0;
        for i in 0..n {
            ball.sweep(y, i, &mut order, &mut dist);
            let row = &mut ranks[i * n..(i + 1) * n];
            BallOrder::ranks(&order, &dist, row);
            for &r in row.iter() {
                let d = r as f64 / nf;
                self_term += (d - d * d) * (d - d * d);
            }
        }
        Self { n, ranks, self_term }
    }

    pub(crate) fn score(&self, x: ArrayView2<'_, f64>) -> f64 {
        let n = self.n;
        let nf = n as f64;
        let ball = BallOrder::new(x);
        let mut order = Vec::with_capacity(n);
        let mut dist = vec![0.0; n];
        let mut rx = vec![0u32; n];
        let mut tree = Fenwick(vec![0; n + 1]);
        let (mut cross, mut self_x) = (0.0, 0.0);
        for i in 0..n {
            ball.sweep(x, i, &mut order, &mut dist);
            BallOrder::ranks(&order, &dist, &mut rx);
            let ry = &self.ranks[i * n..(i + 1) * n];
            tree.clear();
            let mut start = 0;
            while start < n {
                let end = rx[order[start]] as usize;
                for &k in &order[start..end] {
                    tree.add(ry[k] as usize);
                }
                for &k in &order[start..end] {
                    let joint = tree.prefix(ry[k] as usize) as f64 / nf;
                    let dx = rx[k] as f64 / nf;
                    let dy = ry[k] as f64 / nf;
                    let t = joint - dx * dy;
                    cross += t * t;
                    self_x += (dx - dx * dx) * (dx - dx * dx);
                }
                start = end;
            }
        }
        correlation_from_sums(cross, self_x, self.self_term)
    }
}

/// BCor-SIS utility: sample ball correlation.
pub fn bcor_utility(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    assert_eq!(x.nrows(), y.nrows(), "blocks must have equal row counts");
    PreparedBall::new(y).score(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
        let n = x.nrows();
        let d = |z: ArrayView2<'_, f64>, a: usize, b: usize| -> f64 {
            z.row(a).iter().zip(z.row(b).iter()).map(|(p, q)| (p - q).powi(2)).sum::<f64>()
        };
        let cov = |u: ArrayView2<'_, f64>, v: ArrayView2<'_, f64>| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let (mut du, mut dv, mut duv) = (0.0, 0.0, 0.0);
                    for k in 0..n {
                        let a = (d(u, i, k) <= d(u, i, j)) as u8 as f64;
                        let b = (d(v, i, k) <= d(v, i, j)) as u8 as f64;
                        du += a;
                        dv += b;
                        duv += a * b;
                    }
                    let nf = n as f64;
                    let t = duv / nf - du * dv / (nf * nf);
                    s += t * t;
                }
            }
            s
        };
        correlation_from_sums(cov(x, y), cov(x, x), cov(y, y))
    }

    #[test]
    fn matches_naive_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, d, q) in [(5, 1, 1), (7, 2, 1), (6, 1, 3), (9, 2, 2)] {
            let mut x = Array2::from_shape_fn((n, d), |_| rng.gen_range(0..4) as f64);
            let y = Array2::from_shape_fn((n, q), |_| rng.gen_range(-1.0..1.0));
            x[[0, 0]] += 0.5;
            let fast = bcor_utility(x.view(), y.view());
            let slow = naive(x.view(), y.view());
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn self_and_constant() {
        let x = array![[0.1], [1.5], [0.7], [2.2], [-0.4]];
        assert!((bcor_utility(x.view(), x.view()) - 1.0).abs() < 1e-12);
        let c = array![[2.0], [2.0], [2.0], [2.0], [2.0]];
        assert_eq!(bcor_utility(c.view(), x.view()), 0.0);
    }
}
