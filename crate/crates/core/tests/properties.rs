use ndarray::{Array1, Array2};
use proptest::prelude::*;

use screenkit::measures::{pc_utility, utility, MeasureKind, MeasureOptions};
use screenkit::oracle;
use screenkit::transport::{assignment_solve, halton, multivariate_rank, ot_exact, sinkhorn, squared_euclidean_cost, DiscreteMeasure, SinkhornParams};

fn block(n: usize, d: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-5.0f64..5.0, n * d).prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
}

fn pair(max_n: usize) -> impl Strategy<Value = (Array2<f64>, Array2<f64>)> {
    (4..max_n, 1usize..4, 1usize..4).prop_flat_map(|(n, d, q)| (block(n, d), block(n, q)))
}

fn univariate(max_n: usize) -> impl Strategy<Value = (Array2<f64>, Array2<f64>)> {
    (4..max_n).prop_flat_map(|n| (block(n, 1), block(n, 1)))
}

fn weights(m: usize) -> impl Strategy<Value = Array1<f64>> {
    prop::collection::vec(0.05f64..1.0, m).prop_map(|w| {
        let t: f64 = w.iter().sum();
        Array1::from_iter(w.into_iter().map(|v| v / t))
    })
}

fn measure(max: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1..max).prop_flat_map(|m| (block(m, 2), weights(m))).prop_map(|(p, w)| DiscreteMeasure::new(p, w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn correlation_measures_lie_in_unit_interval((x, y) in pair(14)) {
        for kind in MeasureKind::multivariate() {
            if kind == MeasureKind::WdScreen {
                continue;
            }
            let u = utility(kind, x.view(), y.view(), &MeasureOptions::default()).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&u), "{kind}: {u}");
        }
    }

    #[test]
    fn symmetric_measures_are_symmetric((x, y) in pair(14)) {
        for kind in [MeasureKind::DcSis, MeasureKind::ScSis, MeasureKind::PcScreen, MeasureKind::MrDcSis] {
            let o = MeasureOptions::default();
            let a = utility(kind, x.view(), y.view(), &o).unwrap();
            let b = utility(kind, y.view(), x.view(), &o).unwrap();
            prop_assert!((a - b).abs() < 1e-12, "{kind}: {a} vs {b}");
        }
    }

    #[test]
    fn univariate_measures_are_nonnegative_and_finite((x, y) in univariate(20)) {
        for kind in MeasureKind::ALL {
            let u = utility(kind, x.view(), y.view(), &MeasureOptions::default()).unwrap();
            prop_assert!(u.is_finite() && u >= 0.0, "{kind}: {u}");
        }
    }

    #[test]
    fn translation_invariance((x, y) in pair(12), sx in -100.0f64..100.0, sy in -100.0f64..100.0) {
        for kind in MeasureKind::multivariate() {
            let o = MeasureOptions::default();
            let a = utility(kind, x.view(), y.view(), &o).unwrap();
            let b = utility(kind, (&x + sx).view(), (&y + sy).view(), &o).unwrap();
            prop_assert!((a - b).abs() < 1e-9, "{kind}: {a} vs {b}");
        }
    }

    #[test]
    fn monotone_transforms_leave_rank_measures_bit_identical((x, y) in univariate(20)) {
        let fx = x.mapv(|v| v.powi(3) + v);
        let fy = y.mapv(|v| (v / 3.0).exp());
        let o = MeasureOptions::default();
        for kind in [MeasureKind::Rrcs, MeasureKind::MrDcSis] {
            let a = utility(kind, x.view(), y.view(), &o).unwrap();
            let b = utility(kind, fx.view(), fy.view(), &o).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        for kind in [MeasureKind::Sirs, MeasureKind::DcRoSis] {
            let a = utility(kind, x.view(), y.view(), &o).unwrap();
            let b = utility(kind, x.view(), fy.view(), &o).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn pc_invariant_under_coordinate_swaps_and_sign_flips((x, y) in pair(12)) {
        let d = x.ncols();
        let flipped = Array2::from_shape_fn(x.dim(), |(i, j)| -x[[i, d - 1 - j]]);
        let a = pc_utility(x.view(), y.view());
        let b = pc_utility(flipped.view(), y.view());
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn dcor_matches_oracle((x, y) in pair(8)) {
        let a = utility(MeasureKind::DcSis, x.view(), y.view(), &MeasureOptions::default()).unwrap();
        prop_assert!((a - oracle::dcor(x.view(), y.view())).abs() < 1e-9);
    }

    #[test]
    fn assignment_matches_enumeration(m in 1usize..7, seed in prop::collection::vec(-10.0f64..10.0, 49)) {
        let cost = Array2::from_shape_fn((m, m), |(i, j)| seed[i * 7 + j]);
        let (_, c) = assignment_solve(cost.view()).unwrap();
        let (_, best) = oracle::assignment(cost.view());
        prop_assert!((c - best).abs() < 1e-9);
    }

    #[test]
    fn ot_plan_has_requested_marginals(a in measure(8), b in measure(8)) {
        let cost = squared_euclidean_cost(&a, &b);
        let plan = ot_exact(&a, &b, cost.view()).unwrap();
        prop_assert!(plan.coupling.iter().all(|&v| v >= -1e-15));
        for (s, w) in plan.coupling.sum_axis(ndarray::Axis(1)).iter().zip(a.weights()) {
            prop_assert!((s - w).abs() < 1e-9);
        }
        for (s, w) in plan.coupling.sum_axis(ndarray::Axis(0)).iter().zip(b.weights()) {
            prop_assert!((s - w).abs() < 1e-9);
        }
        prop_assert!((plan.cost - (&plan.coupling * &cost).sum()).abs() < 1e-9);
    }

    #[test]
    fn sinkhorn_cost_is_never_below_exact(a in measure(8), b in measure(8)) {
        let cost = squared_euclidean_cost(&a, &b);
        let exact = ot_exact(&a, &b, cost.view()).unwrap().cost;
        let params = SinkhornParams { epsilon: 0.05 * cost.mean().unwrap().max(1e-3), max_iter: 200_000, tol: 1e-9 };
        let approx = sinkhorn(&a, &b, cost.view(), params).unwrap().cost;
        prop_assert!(approx >= exact - 1e-7, "{approx} < {exact}");
    }

    #[test]
    fn multivariate_rank_is_a_grid_bijection(z in (2usize..12, 2usize..4).prop_flat_map(|(n, d)| block(n, d))) {
        let (n, d) = z.dim();
        let r = multivariate_rank(z.view());
        let grid = halton(n, d);
        let mut used = vec![false; n];
        for row in r.rows() {
            let k = grid.rows().into_iter().position(|g| g == row);
            prop_assert!(k.is_some());
            let k = k.unwrap();
            prop_assert!(!used[k]);
            used[k] = true;
        }
    }
}
