use proptest::prelude::*;

use edgelab::kpz;
use edgelab::measures::{bl_distance, SignedMeasure};
use edgelab::ratefn::{self, RateParams};
use edgelab::stats::{summarize, Accumulator};
use edgelab::tridiag::{count_below, top_k_eigenvalues, TridiagonalSym};

fn tridiagonal() -> impl Strategy<Value = TridiagonalSym> {
    (1usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(0.01..3.0f64, n - 1),
        )
            .prop_map(|(d, e)| TridiagonalSym::new(d, e).unwrap())
    })
}

fn atoms(r: f64, max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-r..r, -1.0..1.0f64), 0..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sturm_count_is_monotone(t in tridiagonal(), mut xs in prop::collection::vec(-20.0..20.0f64, 2..10)) {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let counts: Vec<usize> = xs.iter().map(|&x| count_below(&t, x)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(*counts.last().unwrap() <= t.n());
    }

    #[test]
    fn bisection_recovers_ranks(t in tridiagonal()) {
        let n = t.n();
        let all = top_k_eigenvalues(&t, n, 1e-12).unwrap().values;
        prop_assert!(all.windows(2).all(|w| w[0] >= w[1]));
        for (i, w) in all.windows(2).enumerate() {
            if w[0] - w[1] > 1e-8 {
                // i + 1 eigenvalues lie above the midpoint
                prop_assert_eq!(count_below(&t, 0.5 * (w[0] + w[1])), n - i - 1);
            }
        }
        let trace: f64 = t.diag.iter().sum();
        prop_assert!((all.iter().sum::<f64>() - trace).abs() < 1e-8 * (1.0 + trace.abs()) * n as f64);
    }

    #[test]
    fn bl_distance_is_symmetric_and_bounded(a in atoms(2.0, 5), b in atoms(2.0, 5)) {
        let w = (-2.0, 2.0);
        let mu = SignedMeasure::atomic(a, w).unwrap();
        let nu = SignedMeasure::atomic(b, w).unwrap();
        let ab = bl_distance(&mu, &nu, 2.0, 64).unwrap();
        let ba = bl_distance(&nu, &mu, 2.0, 64).unwrap();
        prop_assert!((ab.value - ba.value).abs() <= 3.0 * ab.h);
        prop_assert!(ab.value >= -3.0 * ab.h);
        prop_assert!(ab.value <= mu.total_variation() + nu.total_variation() + 1e-9);
        prop_assert!(ab.test_function.iter().all(|f| f.abs() <= 1.0 + 1e-9));
    }

    #[test]
    fn bl_triangle_inequality(a in atoms(2.0, 4), b in atoms(2.0, 4), c in atoms(2.0, 4)) {
        let w = (-2.0, 2.0);
        let (mu, nu, rho) = (
            SignedMeasure::atomic(a, w).unwrap(),
            SignedMeasure::atomic(b, w).unwrap(),
            SignedMeasure::atomic(c, w).unwrap(),
        );
        let d = |x: &SignedMeasure, y: &SignedMeasure| bl_distance(x, y, 2.0, 64).unwrap();
        let h = d(&mu, &nu).h;
        prop_assert!(d(&mu, &rho).value <= d(&mu, &nu).value + d(&nu, &rho).value + 3.0 * h);
    }

    #[test]
    fn bl_translation_by_grid_steps(a in atoms(1.0, 4), b in atoms(1.0, 4), steps in -8i32..8) {
        let (r, m) = (4.0, 128);
        let h = 2.0 * r / m as f64;
        let shift = steps as f64 * h;
        let w = (-r, r);
        let moved = |v: &[(f64, f64)]| v.iter().map(|&(x, q)| (x + shift, q)).collect::<Vec<_>>();
        let d0 = bl_distance(&SignedMeasure::atomic(a.clone(), w).unwrap(), &SignedMeasure::atomic(b.clone(), w).unwrap(), r, m).unwrap();
        let d1 = bl_distance(&SignedMeasure::atomic(moved(&a), w).unwrap(), &SignedMeasure::atomic(moved(&b), w).unwrap(), r, m).unwrap();
        prop_assert!((d0.value - d1.value).abs() <= 3.0 * h);
    }

    #[test]
    fn laplace_product_decreases_in_s(
        mut pts in prop::collection::vec(-6.0..3.0f64, 0..12),
        s in -3.0..3.0f64,
        ds in 0.0..3.0f64,
        t in 0.01..1e6f64,
    ) {
        pts.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let a = kpz::laplace_product_finite(&pts, s, t).unwrap();
        let b = kpz::laplace_product_finite(&pts, s + ds, t).unwrap();
        prop_assert!(b.value <= a.value);
        prop_assert!((0.0..=1.0).contains(&a.value));
        let u = (-s).exp();
        let h = kpz::laplace_product_halfspace_finite(&pts, u, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&h.value));
    }

    #[test]
    fn phi_minus_is_nonnegative(z in -50.0..=0.0f64) {
        prop_assert!(ratefn::phi_minus(z).unwrap() >= 0.0);
    }

    #[test]
    fn interaction_is_reflection_invariant(a in atoms(2.0, 6), r1 in 1.0..5.0f64) {
        let w = (-2.0, 2.0);
        let p = RateParams::new(2.0, r1);
        let mu = SignedMeasure::atomic(a.clone(), w).unwrap();
        let flipped = SignedMeasure::atomic(a.iter().map(|&(x, q)| (-x, q)).collect(), w).unwrap();
        let i = ratefn::rate_interaction(&mu, &p).unwrap();
        let j = ratefn::rate_interaction(&flipped, &p).unwrap();
        prop_assert!((i - j).abs() <= 1e-8 * (1.0 + i.abs()));
    }

    #[test]
    fn truncated_energy_grows_with_r1(
        pos in prop::collection::vec(-2.0..2.0f64, 1..6),
        weights in prop::collection::vec(0.01..1.0f64, 6),
        r1 in 1.0..4.0f64,
        dr in 0.0..4.0f64,
    ) {
        // with positive weights every pair term −log max(d, R1⁻³) is
        // non-decreasing in R1
        let w = (-2.0, 2.0);
        let mu = SignedMeasure::atomic(pos.iter().zip(&weights).map(|(&x, &q)| (x, q)).collect(), w).unwrap();
        let lo = ratefn::rate_interaction(&mu, &RateParams::new(2.0, r1)).unwrap();
        let hi = ratefn::rate_interaction(&mu, &RateParams::new(2.0, r1 + dr)).unwrap();
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn i2_positive_for_nonzero_measures(a in atoms(1.5, 4).prop_filter("nonzero", |v| v.iter().any(|p| p.1.abs() > 1e-3))) {
        let mu = SignedMeasure::atomic(a, (-2.0, 2.0)).unwrap();
        let trace = ratefn::psi_and_i2(&mu, &RateParams::new(2.0, 2.0)).unwrap();
        prop_assert!(trace.i2 > 0.0);
    }

    #[test]
    fn measure_json_round_trips(a in atoms(3.0, 8)) {
        let mu = SignedMeasure::atomic(a, (-3.0, 3.0)).unwrap();
        prop_assert_eq!(SignedMeasure::from_json(&mu.to_json().unwrap()).unwrap(), mu);
    }

    #[test]
    fn accumulator_agrees_with_batch(xs in prop::collection::vec(-1e3..1e3f64, 1..200)) {
        let mut acc = Accumulator::default();
        xs.iter().for_each(|&x| acc.push(x));
        let (s, b) = (acc.summary(), summarize(&xs));
        prop_assert_eq!(s.count, b.count);
        prop_assert!((s.mean - b.mean).abs() <= 1e-9 * (1.0 + b.mean.abs()));
        prop_assert!((s.variance - b.variance).abs() <= 1e-7 * (1.0 + b.variance));
    }
}
