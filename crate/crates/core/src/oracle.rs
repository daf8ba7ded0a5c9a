//! Brute-force reference implementations for small inputs.
//!
//! Everything here is written directly from the textbook definitions with
//! plain loops and shares no code with the production paths, so the two can
//! be checked against each other (see the `selftest` subcommand). Costs are
//! polynomial with large exponents or factorial; keep `n` in single digits.

use ndarray::{Array2, ArrayView2};

use crate::measures::DistanceTransform;

fn rows(z: ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    z.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

fn sq_euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn ratio(cross: f64, xx: f64, yy: f64) -> f64 {
    if xx <= 0.0 || yy <= 0.0 {
        return 0.0;
    }
    (cross.max(0.0) / (xx * yy).sqrt()).sqrt()
}

/// |Pearson correlation| from the definition.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        0.0
    } else {
        (sxy / (sxx * syy).sqrt()).abs()
    }
}

/// Mid-ranks by counting: `#{y_j < y_i} + (#{y_j == y_i} + 1) / 2`.
pub fn midranks(y: &[f64]) -> Vec<f64> {
    y.iter()
        .map(|&v| {
            let below = y.iter().filter(|&&w| w < v).count() as f64;
            let equal = y.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn scaled(y: &[f64]) -> Vec<f64> {
    let n = y.len() as f64;
    midranks(y).into_iter().map(|r| r / n).collect()
}

pub fn sirs(x: &[f64], y: &[f64]) -> f64 {
    pearson(x, &scaled(y))
}

/// |Kendall tau-b| by pair enumeration.
pub fn kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let sgn = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    let (mut s, mut tx, mut ty) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = sgn(x[i] - x[j]);
            let b = sgn(y[i] - y[j]);
            s += a * b;
            tx += a * a;
            ty += b * b;
        }
    }
    if tx == 0.0 || ty == 0.0 {
        0.0
    } else {
        (s / (tx * ty).sqrt()).abs()
    }
}

fn pair_matrix(z: &[Vec<f64>], transform: DistanceTransform) -> Vec<Vec<f64>> {
    let n = z.len();
    let raw: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| euclid(&z[i], &z[j])).collect()).collect();
    let g: Box<dyn Fn(f64) -> f64> = match transform {
        DistanceTransform::Identity => Box::new(|u| u),
        DistanceTransform::NegExpRaw => Box::new(|u: f64| 1.0 - (-u).exp()),
        DistanceTransform::NegExp => {
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        total += raw[i][j];
                    }
                }
            }
            let s = total / (n * (n - 1)) as f64;
            if s > 0.0 {
                Box::new(move |u: f64| 1.0 - (-u / s).exp())
            } else {
                Box::new(|u| u)
            }
        }
    };
    raw.into_iter().map(|r| r.into_iter().map(&g).collect()).collect()
}

/// `S1 + S2 - 2 S3` form of the squared distance covariance.
fn dcov2(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let nf = n as f64;
    let (mut s1, mut ma, mut mb, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s1 += a[i][j] * b[i][j];
            ma += a[i][j];
            mb += b[i][j];
            for k in 0..n {
                s3 += a[i][j] * b[i][k];
            }
        }
    }
    s1 / (nf * nf) + (ma / (nf * nf)) * (mb / (nf * nf)) - 2.0 * s3 / (nf * nf * nf)
}

/// Distance correlation with an optional distance transform.
pub fn distance_correlation(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, transform: DistanceTransform) -> f64 {
    let a = pair_matrix(&rows(x), transform);
    let b = pair_matrix(&rows(y), transform);
    ratio(dcov2(&a, &b), dcov2(&a, &a), dcov2(&b, &b))
}

pub fn dcor(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    distance_correlation(x, y, DistanceTransform::Identity)
}

pub fn dc_rosis(x: &[f64], y: &[f64]) -> f64 {
    let xb = Array2::from_shape_fn((x.len(), 1), |(i, _)| x[i]);
    let r = scaled(y);
    let yb = Array2::from_shape_fn((y.len(), 1), |(i, _)| r[i]);
    dcor(xb.view(), yb.view())
}

/// Radical inverse by repeated division.
fn van_der_corput(mut i: u64, base: u64) -> f64 {
    let mut out = 0.0;
    let mut denom = 1.0;
    while i > 0 {
        denom *= base as f64;
        out += (i % base) as f64 / denom;
        i /= base;
    }
    out
}

fn nth_primes(k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = 2u64;
    while out.len() < k {
        if (2..c).all(|d| c % d != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Every permutation of `0..m` (Heap's algorithm).
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut a: Vec<usize> = (0..m).collect();
    let mut out = Vec::new();
    heap(m, &mut a, &mut out);
    out
}

/// Minimum-cost permutation by enumeration.
pub fn assignment(cost: ArrayView2<'_, f64>) -> (Vec<usize>, f64) {
    let m = cost.nrows();
    let mut best = (Vec::new(), f64::INFINITY);
    for p in permutations(m) {
        let c: f64 = p.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum();
        if c < best.1 {
            best = (p, c);
        }
    }
    best
}

/// Multivariate rank by enumerating every data-to-grid bijection.
pub fn multivariate_rank(z: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, dim) = z.dim();
    if dim == 1 {
        let col: Vec<f64> = z.column(0).to_vec();
        return Array2::from_shape_fn((n, 1), |(i, _)| {
            let before = (0..n)
                .filter(|&j| col[j] < col[i] || (col[j] == col[i] && j < i))
                .count();
            (before + 1) as f64 / n as f64
        });
    }
    let bases = nth_primes(dim);
    let grid: Vec<Vec<f64>> = (0..n)
        .map(|i| bases.iter().map(|&b| van_der_corput(i as u64 + 1, b)).collect())
        .collect();
    let pts = rows(z);
    let cost = Array2::from_shape_fn((n, n), |(i, j)| sq_euclid(&pts[i], &grid[j]));
    let (perm, _) = assignment(cost.view());
    Array2::from_shape_fn((n, dim), |(i, c)| grid[perm[i]][c])
}

pub fn mrdc(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    let constant = |z: ArrayView2<'_, f64>| z.rows().into_iter().all(|r| r == z.row(0));
    if constant(x) || constant(y) {
        return 0.0;
    }
    dcor(multivariate_rank(x).view(), multivariate_rank(y).view())
}

/// Angle at `o` between `a - o` and `b - o`, by Kahan's formula on the
/// unnormalized differences; 0 when either difference vanishes.
fn angle(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let u: Vec<f64> = a.iter().zip(o).map(|(p, q)| p - q).collect();
    let v: Vec<f64> = b.iter().zip(o).map(|(p, q)| p - q).collect();
    let nu = u.iter().map(|t| t * t).sum::<f64>().sqrt();
    let nv = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let mut d = 0.0;
    let mut s = 0.0;
    for c in 0..u.len() {
        let p = nv * u[c];
        let q = nu * v[c];
        d += (p - q) * (p - q);
        s += (p + q) * (p + q);
    }
    2.0 * d.sqrt().atan2(s.sqrt())
}

fn projection_cov(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let nf = n as f64;
    let mut total = 0.0;
    for r in 0..n {
        let a: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|l| angle(&x[r], &x[k], &x[l])).collect()).collect();
        let b: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|l| angle(&y[r], &y[k], &y[l])).collect()).collect();
        let center = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            let rm: Vec<f64> = (0..n).map(|k| m[k].iter().sum::<f64>() / nf).collect();
            let cm: Vec<f64> = (0..n).map(|l| (0..n).map(|k| m[k][l]).sum::<f64>() / nf).collect();
            let g = rm.iter().sum::<f64>() / nf;
            (0..n).map(|k| (0..n).map(|l| m[k][l] - rm[k] - cm[l] + g).collect()).collect()
        };
        let (ac, bc) = (center(&a), center(&b));
        for k in 0..n {
            for l in 0..n {
                total += ac[k][l] * bc[k][l];
            }
        }
    }
    total / (nf * nf * nf)
}

/// Projection correlation by the triple loop over anchors and pairs.
pub fn projection_correlation(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    let (xr, yr) = (rows(x), rows(y));
    ratio(projection_cov(&xr, &yr), projection_cov(&xr, &xr), projection_cov(&yr, &yr))
}

fn ball_cov(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let nf = n as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (mut dx, mut dy, mut dxy) = (0.0, 0.0, 0.0);
            for k in 0..n {
                let a = (euclid(&x[k], &x[i]) <= euclid(&x[j], &x[i])) as u8 as f64;
                let b = (euclid(&y[k], &y[i]) <= euclid(&y[j], &y[i])) as u8 as f64;
                dx += a / nf;
                dy += b / nf;
                dxy += a * b / nf;
            }
            total += (dxy - dx * dy) * (dxy - dx * dy);
        }
    }
    total / (nf * nf)
}

/// Ball correlation by the triple loop.
pub fn ball_correlation(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    let (xr, yr) = (rows(x), rows(y));
    ratio(ball_cov(&xr, &yr), ball_cov(&xr, &xr), ball_cov(&yr, &yr))
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Transportation LP optimum by enumerating basic solutions: every choice of
/// `m + k - 1` cells whose marginal equations (last column equation dropped)
/// have a unique nonnegative solution is a vertex. Feasible for
/// `m * k <= ~14`.
pub fn transport_lp(a: &[f64], b: &[f64], cost: ArrayView2<'_, f64>) -> f64 {
    let (m, k) = (a.len(), b.len());
    let cells = m * k;
    let basis = m + k - 1;
    let mut best = f64::INFINITY;
    combinations(cells, basis, &mut |sel| {
        let mut mat = vec![vec![0.0; basis]; basis];
        let mut rhs = vec![0.0; basis];
        for (c, &cell) in sel.iter().enumerate() {
            let (i, j) = (cell / k, cell % k);
            mat[i][c] = 1.0;
            if j + 1 < k {
                mat[m + j][c] = 1.0;
            }
        }
        rhs[..m].copy_from_slice(a);
        rhs[m..].copy_from_slice(&b[..k - 1]);
        if let Some(xs) = solve_square(mat, rhs) {
            if xs.iter().all(|&v| v >= -1e-12) {
                let c: f64 = sel.iter().zip(&xs).map(|(&cell, &v)| v * cost[[cell / k, cell % k]]).sum();
                best = best.min(c);
            }
        }
    });
    best
}

/// Integer min-cost flow by successive shortest paths (Bellman–Ford on the
/// residual graph). `supply[i]` units leave source `i`, `demand[j]` units
/// enter sink `j`; returns the minimum total cost.
pub fn unit_flow(supply: &[usize], demand: &[usize], cost: ArrayView2<'_, f64>) -> f64 {
    let (m, k) = (supply.len(), demand.len());
    // nodes: 0 = super source, 1..=m sources, m+1..=m+k sinks, m+k+1 = super sink
    let nodes = m + k + 2;
    let t = nodes - 1;
    let mut to = Vec::new();
    let mut cap = Vec::new();
    let mut w = Vec::new();
    let mut add = |u: usize, v: usize, c: usize, cost: f64, to: &mut Vec<(usize, usize)>| {
        to.push((u, v));
        cap.push(c);
        w.push(cost);
        to.push((v, u));
        cap.push(0);
        w.push(-cost);
    };
    for i in 0..m {
        add(0, 1 + i, supply[i], 0.0, &mut to);
        for j in 0..k {
            add(1 + i, 1 + m + j, usize::MAX / 4, cost[[i, j]], &mut to);
        }
    }
    for j in 0..k {
        add(1 + m + j, t, demand[j], 0.0, &mut to);
    }
    let total_units: usize = supply.iter().sum();
    let mut total = 0.0;
    for _ in 0..total_units {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev = vec![usize::MAX; nodes];
        dist[0] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for (e, &(u, v)) in to.iter().enumerate() {
                if cap[e] > 0 && dist[u] + w[e] < dist[v] - 1e-15 {
                    dist[v] = dist[u] + w[e];
                    prev[v] = e;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[t].is_finite() {
            break;
        }
        let mut v = t;
        while v != 0 {
            let e = prev[v];
            cap[e] -= 1;
            cap[e ^ 1] += 1;
            v = to[e].0;
        }
        total += dist[t];
    }
    total
}

/// Column standardization with the `n - 1` divisor; constant columns to 0.
pub fn standardize(z: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, d) = z.dim();
    let mut out = Array2::zeros((n, d));
    for c in 0..d {
        let col: Vec<f64> = z.column(c).to_vec();
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        if col.iter().any(|&v| v != col[0]) && var > 0.0 {
            for i in 0..n {
                out[[i, c]] = (col[i] - mean) / var.sqrt();
            }
        }
    }
    out
}

/// Exact Wasserstein dependence with standardized coordinates: uniform joint
/// atoms carry `n` units, product atoms one unit each, total cost divided by
/// `n^2`.
pub fn wasserstein_dependence(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    let n = x.nrows();
    let constant = |z: ArrayView2<'_, f64>| z.rows().into_iter().all(|r| r == z.row(0));
    if constant(x) || constant(y) {
        return 0.0;
    }
    let xs = rows(standardize(x).view());
    let ys = rows(standardize(y).view());
    let cost = Array2::from_shape_fn((n, n * n), |(i, c)| {
        let (a, b) = (c / n, c % n);
        sq_euclid(&xs[i], &xs[a]) + sq_euclid(&ys[i], &ys[b])
    });
    unit_flow(&vec![n; n], &vec![1; n * n], cost.view()) / (n * n) as f64
}
