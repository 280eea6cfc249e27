use billiard_lab::billiard::PhasePoint;
use billiard_lab::curve::{make_curve, ArcSpec, CurveSpec};
use billiard_lab::lazutkin::{build_sigma, equipartition_points, hamiltonian_at, shift_consistency};
use billiard_lab::trajectory::{solve_min_polyline, SolveOptions};
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

/// Unnormalized Lazutkin mass of the ellipse between parameters 0 and `t`,
/// by composite Simpson in the angle parameter: `½ k^{2/3} |γ'| = ½ (ab)^{2/3} / |γ'|`.
fn ellipse_mass(a: f64, b: f64, t: f64) -> f64 {
    let f = |u: f64| 0.5 * (a * b).powf(2.0 / 3.0) / (a * a * u.sin().powi(2) + b * b * u.cos().powi(2)).sqrt();
    let m = 20_000;
    let h = t / m as f64;
    let mut acc = f(0.0) + f(t);
    for i in 1..m {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn sigma_matches_simpson_oracle() {
    let (a, b) = (2.0, 1.0);
    let c = make_curve(CurveSpec::Ellipse { a, b }).unwrap();
    let sm = build_sigma(&c, ArcSpec::quarter(&c)).unwrap();
    let total = ellipse_mass(a, b, FRAC_PI_2);
    assert!((sm.total_mass() - total).abs() <= 1e-10);
    for t in [0.1, 0.4, 0.785, 1.2, 1.5] {
        let s = c.s_of_t(t);
        assert!((sm.sigma(s) - ellipse_mass(a, b, t) / total).abs() <= 1e-10, "t = {t}");
    }
}

#[test]
fn circle_sigma_is_affine_in_s() {
    let c = make_curve(CurveSpec::Circle { radius: 2.0 }).unwrap();
    let sm = build_sigma(&c, ArcSpec::new(&c, 1.0, 3.0).unwrap()).unwrap();
    for s in [1.0, 1.5, 2.2, 3.0] {
        assert!((sm.sigma(s) - (s - 1.0) / 2.0).abs() <= 1e-13);
    }
    // ½ k^{2/3} · length = ½ · 2^{-2/3} · 2.
    assert!((sm.total_mass() - 2f64.powf(-2.0 / 3.0)).abs() <= 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_inverse_round_trips(ecc in 0.3f64..1.0, u in 0.0f64..1.0) {
        let c = make_curve(CurveSpec::Ellipse { a: 1.5, b: 1.5 * ecc }).unwrap();
        let sm = build_sigma(&c, ArcSpec::quarter(&c)).unwrap();
        let s = sm.s_of_sigma(u);
        prop_assert!((sm.sigma(s) - u).abs() <= 1e-12);
    }

    #[test]
    fn equipartition_is_monotone(n in 2usize..200) {
        let c = make_curve(CurveSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let sm = build_sigma(&c, ArcSpec::quarter(&c)).unwrap();
        let pts = equipartition_points(&sm, n);
        prop_assert_eq!(pts.len(), n + 1);
        prop_assert!(pts.windows(2).all(|w| w[1] > w[0]));
        for (m, s) in pts.iter().enumerate() {
            prop_assert!((sm.sigma(*s) - m as f64 / n as f64).abs() <= 1e-12);
        }
    }
}

#[test]
fn circle_shift_is_exact() {
    let c = make_curve(CurveSpec::Circle { radius: 1.0 }).unwrap();
    let sm = build_sigma(&c, ArcSpec::new(&c, 0.0, 1.0).unwrap()).unwrap();
    for n in [2, 5, 17, 64, 256] {
        let t = solve_min_polyline(&c, &sm, n, SolveOptions::default()).unwrap();
        let r = shift_consistency(&sm, &t);
        assert!(r.max_sqrt_h_dev <= 1e-9, "n = {n}: {}", r.max_sqrt_h_dev);
        assert!(r.max_dsigma_dev <= 1e-9);
        assert!(r.h_spread_rel <= 1e-9);
    }
}

#[test]
fn hamiltonian_scales_with_angle_squared() {
    let c = make_curve(CurveSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
    let sm = build_sigma(&c, ArcSpec::quarter(&c)).unwrap();
    let h1 = hamiltonian_at(&sm, PhasePoint::new(0.7, 0.01)).h_norm;
    let h2 = hamiltonian_at(&sm, PhasePoint::new(0.7, 0.02)).h_norm;
    assert!((h2 / h1 - 4.0).abs() <= 1e-12);
}

#[test]
fn ellipse_shift_deviation_decays() {
    let c = make_curve(CurveSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
    let sm = build_sigma(&c, ArcSpec::quarter(&c)).unwrap();
    let devs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            shift_consistency(&sm, &solve_min_polyline(&c, &sm, n, SolveOptions::default()).unwrap()).max_dsigma_dev
        })
        .collect();
    // Consecutive spacings deviate from 1/n by O(n^-3).
    for w in devs.windows(2) {
        let factor = w[0] / w[1];
        assert!((7.0..9.0).contains(&factor), "factor {factor}");
    }
}
