mod common;

use proptest::prelude::*;
use rand::Rng;
use w2clt::gaussian;
use w2clt::lindeberg::{build_row, row_sum_w2, sweep, Family};
use w2clt::renormalization::{contraction_check, rg_trace};
use w2clt::transport::{comonotone_coupling, w2_discrete, w2_to_gaussian};
use w2clt::DiscreteDist;

#[test]
fn w2_to_gaussian_matches_quadrature() {
    let mut rng = common::rng(21);
    for _ in 0..30 {
        let k = rng.random_range(1..=12);
        let d = common::random_dist(&mut rng, k);
        let exact = w2_to_gaussian(&d).squared_distance;
        let quad = common::w2_to_normal_squared_by_quadrature(&d);
        assert!((exact - quad).abs() <= 1e-9, "{exact} vs {quad}");
    }
}

#[test]
fn equal_mass_gaussian_bins_converge() {
    let mut prev = f64::INFINITY;
    for j in 4..=14 {
        let d = w2_to_gaussian(&gaussian::equal_mass_bins(1 << j).unwrap()).distance;
        assert!(d < prev, "m = 2^{j}: {d} after {prev}");
        prev = d;
    }
    assert!(prev < 0.01, "{prev}");
}

#[test]
fn contraction_near_the_equality_case() {
    // 2^10 bins keep the self-convolution under the default pair cap
    let q = gaussian::equal_mass_bins(1 << 10).unwrap().standardize().unwrap();
    let eps = w2_to_gaussian(&q).distance;
    let c = contraction_check(&q, &q).unwrap();
    assert!(c.margin >= -1e-9 && c.margin <= 2.0 * eps, "{c:?}, eps {eps}");
}

#[test]
fn squared_distance_is_two_minus_twice_max_correlation() {
    let mut rng = common::rng(22);
    for _ in 0..100 {
        let (ka, kb) = (rng.random_range(2..=15), rng.random_range(2..=15));
        let a = common::random_standardized(&mut rng, ka);
        let b = common::random_standardized(&mut rng, kb);
        let w = w2_discrete(&a, &b).squared_distance;
        let corr = comonotone_coupling(&a, &b).correlation();
        assert!((w - (2.0 - 2.0 * corr)).abs() < 1e-12, "{w} vs {corr}");
    }
}

#[test]
fn comonotone_coupling_has_the_right_marginals_and_cost() {
    let mut rng = common::rng(23);
    for _ in 0..50 {
        let (ka, kb) = (rng.random_range(1..=15), rng.random_range(1..=15));
        let a = common::random_dist(&mut rng, ka);
        let b = common::random_dist(&mut rng, kb);
        let c = comonotone_coupling(&a, &b);
        assert!(c.marginal_error(&a, &b) < 1e-12);
        assert!((c.cost() - w2_discrete(&a, &b).squared_distance).abs() < 1e-12);
    }
}

#[test]
fn rademacher_rows_reproduce_the_dyadic_trace() {
    let trace = rg_trace(&DiscreteDist::rademacher(), 8, 1 << 16).unwrap();
    for k in 1..=8 {
        let eps = 2f64.powf(-(k as f64) / 2.0);
        let row = build_row(Family::RademacherEqual, eps, 0).unwrap();
        assert_eq!(row.terms.len(), 1 << k);
        let (w2, q) = row_sum_w2(&row, 1 << 16).unwrap();
        assert_eq!(q, 0.0);
        assert!((w2 - trace.records[k].w2_to_gaussian).abs() < 1e-10, "k = {k}");
    }
}

#[test]
fn rademacher_equal_sweep_strictly_decreases() {
    let grid: Vec<f64> = (1..=5).map(|j| 2f64.powf(-(j as f64) / 2.0)).collect();
    let r = sweep(&[Family::RademacherEqual], &grid, 1 << 16, 0).unwrap();
    let w: Vec<f64> = r.entries.iter().map(|e| e.w2).collect();
    assert_eq!(w.len(), 5);
    assert!(w.windows(2).all(|p| p[1] < p[0]), "{w:?}");
}

#[test]
fn uncapped_rows_pay_no_quantization() {
    for family in Family::ALL {
        let row = build_row(family, 0.3, 4).unwrap();
        let (_, q) = row_sum_w2(&row, usize::MAX).unwrap();
        assert_eq!(q, 0.0);
    }
}

#[test]
fn exact_traces_keep_unit_variance() {
    let laws = [
        DiscreteDist::rademacher(),
        DiscreteDist::uniform(&[-1.0, 0.0, 1.0])
            .unwrap()
            .standardize()
            .unwrap(),
        DiscreteDist::new([(-1.3, 0.2), (0.1, 0.7), (2.9, 0.1)])
            .unwrap()
            .standardize()
            .unwrap(),
    ];
    for (d, iters) in laws.iter().zip([10, 9, 8]) {
        let t = rg_trace(d, iters, 1 << 16).unwrap();
        for r in &t.records {
            assert_eq!(r.quantization_error, 0.0, "{r:?}");
            assert!(r.mean.abs() < 1e-9, "{r:?}");
            assert!((r.variance - 1.0).abs() < 1e-6, "{r:?}");
        }
    }
}

#[test]
fn quantized_traces_stay_within_their_budget() {
    // irrational gaps: supports never merge, so quantization kicks in
    let d = DiscreteDist::new([
        (-1.0, 0.25),
        (0.0, 0.25),
        (2f64.sqrt(), 0.25),
        (3f64.sqrt(), 0.25),
    ])
    .unwrap()
    .standardize()
    .unwrap();
    let t = rg_trace(&d, 10, 1 << 16).unwrap();
    assert!(t.records.iter().any(|r| r.quantization_error > 0.0));
    let spent: f64 = t.records.iter().map(|r| r.quantization_error).sum();
    for p in t.records.windows(2) {
        assert!(p[1].w2_to_gaussian <= p[0].w2_to_gaussian + p[1].quantization_error + 1e-9);
    }
    for r in &t.records {
        assert!(r.mean.abs() < 1e-9, "{r:?}");
        assert!((r.variance - 1.0).abs() <= 2.0 * spent, "{r:?}");
    }
}

fn arb_dist() -> impl Strategy<Value = DiscreteDist> {
    prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..12).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        DiscreteDist::new(atoms.into_iter().map(|(x, w)| (x, w / total))).unwrap()
    })
}

proptest! {
    #[test]
    fn w2_is_a_metric(a in arb_dist(), b in arb_dist(), c in arb_dist()) {
        let ab = w2_discrete(&a, &b).distance;
        prop_assert!(w2_discrete(&a, &a).distance < 1e-12);
        prop_assert!((ab - w2_discrete(&b, &a).distance).abs() < 1e-12);
        let ac = w2_discrete(&a, &c).distance;
        let cb = w2_discrete(&c, &b).distance;
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn shift_moves_distance_predictably(a in arb_dist(), s in -3.0f64..3.0) {
        // W2(X, X + s) = |s|
        let b = a.affine(1.0, s).unwrap();
        prop_assert!((w2_discrete(&a, &b).distance - s.abs()).abs() < 1e-9);
    }

    #[test]
    fn gaussian_distance_obeys_triangle_inequality(a in arb_dist(), b in arb_dist()) {
        let ab = w2_discrete(&a, &b).distance;
        let (az, bz) = (w2_to_gaussian(&a).distance, w2_to_gaussian(&b).distance);
        prop_assert!(az <= ab + bz + 1e-9);
        prop_assert!((az - bz).abs() <= ab + 1e-9);
    }

    #[test]
    fn contraction_holds(a in arb_dist(), b in arb_dist()) {
        prop_assume!(a.len() >= 2 && b.len() >= 2);
        let (a, b) = (a.standardize().unwrap(), b.standardize().unwrap());
        prop_assert!(contraction_check(&a, &b).unwrap().margin >= -1e-9);
    }
}
