//! Univariate correlation utilities: Pearson (SIS), Pearson against response
//! ranks (SIRS), and Kendall's tau-b (RRCS).

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Mid-ranks (average rank for ties), 1-based.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        // positions i..j share the rank (i+1 + j) / 2
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Centered copy and its sum of squares.
pub(crate) fn center(y: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let c: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).sum();
    (c, ss)
}

/// |Pearson correlation| of `x` against an already-centered response.
pub(crate) fn abs_pearson_centered(x: &[f64], yc: &[f64], syy: f64, y_constant: bool) -> f64 {
    if y_constant || x.is_empty() || is_constant(x) {
        return 0.0;
    }
    let (xc, sxx) = center(x);
    let sxy: f64 = xc.iter().zip(yc).map(|(a, b)| a * b).sum();
    let den = (sxx * syy).sqrt();
    if den > 0.0 {
        (sxy / den).abs().min(1.0)
    } else {
        0.0
    }
}

/// SIS utility: absolute sample Pearson correlation, 0 for constant input.
pub fn pearson_utility(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "x and y must have equal length");
    if y.is_empty() {
        return 0.0;
    }
    let (yc, syy) = center(y);
    abs_pearson_centered(x, &yc, syy, is_constant(y))
}

/// Response transform used by SIRS and DC-RoSIS: mid-ranks divided by `n`.
pub fn scaled_ranks(y: &[f64]) -> Vec<f64> {
    let n = y.len() as f64;
    midranks(y).into_iter().map(|r| r / n).collect()
}

/// SIRS utility: Pearson correlation of `x` with `ranks(y) / n`.
pub fn sirs_utility(x: &[f64], y: &[f64]) -> f64 {
    pearson_utility(x, &scaled_ranks(y))
}

/// RRCS utility: |Kendall tau-b| with the usual tie correction; 0 when either
/// side is constant.
pub fn kendall_utility(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "x and y must have equal length");
    let n = x.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut tied_x = 0i64;
    let mut tied_y = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).expect("finite input") as i64;
            let dy = y[i].partial_cmp(&y[j]).expect("finite input") as i64;
            if dx == 0 {
                tied_x += 1;
            }
            if dy == 0 {
                tied_y += 1;
            }
            match dx * dy {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    let pairs = (n * n.saturating_sub(1) / 2) as i64;
    let den = ((pairs - tied_x) as f64 * (pairs - tied_y) as f64).sqrt();
    if den > 0.0 {
        ((concordant - discordant) as f64 / den).abs().min(1.0)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let x = [0.3, -1.2, 2.0, 5.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson_utility(&x, &y) - 1.0).abs() < 1e-12);
        assert!((pearson_utility(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]) - 0.5).abs() < 1e-12);
        assert_eq!(pearson_utility(&x, &[4.0; 4]), 0.0);
    }

    #[test]
    fn sirs_examples() {
        assert!((sirs_utility(&[1.0, 2.0, 3.0], &[10.0, 30.0, 20.0]) - 0.5).abs() < 1e-12);
        assert_eq!(sirs_utility(&[1.0, 2.0, 3.0], &[7.0; 3]), 0.0);
        let x = [0.1, -0.7, 1.3, 0.4, -2.0, 0.9];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        let y2: Vec<f64> = y.iter().map(|v| v.powi(3) + 1.0).collect();
        assert_eq!(sirs_utility(&x, &y), sirs_utility(&x, &y2));
    }

    #[test]
    fn kendall_examples() {
        let x = [0.5, -1.0, 2.0, 3.0, -0.2];
        let y: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        assert!((kendall_utility(&x, &y) - 1.0).abs() < 1e-12);
        assert!((kendall_utility(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(kendall_utility(&[2.0; 3], &[3.0, 1.0, 2.0]), 0.0);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(midranks(&[5.0; 3]), vec![2.0; 3]);
    }
}
