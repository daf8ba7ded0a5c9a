//! Dense linear assignment by shortest augmenting paths with dual potentials
//! (Jonker–Volgenant style), O(m^3).

use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// Solves `min_pi sum_i cost[i][pi(i)]` over permutations.
///
/// Returns the row-to-column assignment and its total cost.
pub fn assignment_solve(cost: ArrayView2<'_, f64>) -> Result<(Vec<usize>, f64)> {
    let (m, k) = cost.dim();
    if m != k {
        return Err(Error::Argument(format!("assignment needs a square cost matrix, got {m}x{k}")));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::Argument("assignment cost matrix has non-finite entries".into()));
    }
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let c = cost.as_standard_layout();
    let c = c.as_slice().expect("standard layout");
    let perm = solve_dense(c, m);
    let total = perm.iter().enumerate().map(|(i, &j)| c[i * m + j]).sum();
    Ok((perm, total))
}

/// Core solver over a row-major `m x m` slice. Rows are inserted one at a
/// time; each insertion runs a Dijkstra-like search over reduced costs and
/// augments along the shortest alternating path.
pub(crate) fn solve_dense(c: &[f64], m: usize) -> Vec<usize> {
    // 1-based bookkeeping; column 0 is a virtual sink.
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=m {
        row_of[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let row = &c[(i0 - 1) * m..i0 * m];
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - ui0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0usize; m];
    for j in 1..=m {
        if row_of[j] > 0 {
            perm[row_of[j] - 1] = j - 1;
        }
    }
    perm
}
