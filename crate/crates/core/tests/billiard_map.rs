use billiard_lab::billiard::{collide, next_collision, orbit, symplectic_check, PhasePoint, PHI_MIN};
use billiard_lab::curve::{make_curve, Curve, CurveSpec};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn wrap_diff(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

fn ellipse(a: f64, b: f64) -> Curve {
    make_curve(CurveSpec::Ellipse { a, b }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn circle_map_is_rigid_rotation(r in 0.2f64..5.0, s in 0.0f64..1.0, phi in 1e-3f64..PI - 1e-3) {
        let c = make_curve(CurveSpec::Circle { radius: r }).unwrap();
        let x = PhasePoint::new(s * c.length(), phi);
        let y = next_collision(&c, x).unwrap();
        prop_assert!(wrap_diff(y.s, x.s + 2.0 * r * phi, c.length()) <= 1e-10 * r.max(1.0));
        prop_assert!((y.phi - phi).abs() <= 1e-10);
    }

    #[test]
    fn ellipse_map_preserves_area(a in 1.0f64..3.0, ecc in 0.3f64..1.0, s in 0.0f64..1.0, phi in 0.05f64..PI - 0.05) {
        let c = ellipse(a, a * ecc);
        let ratio = symplectic_check(&c, PhasePoint::new(s * c.length(), phi), 1e-5).unwrap();
        prop_assert!((ratio - 1.0).abs() <= 1e-4, "ratio {}", ratio);
    }

    #[test]
    fn map_is_time_reversible(s in 0.0f64..1.0, phi in 0.01f64..PI - 0.01) {
        let c = ellipse(2.0, 1.0);
        let x = PhasePoint::new(s * c.length(), phi);
        let y = next_collision(&c, x).unwrap();
        let back = next_collision(&c, PhasePoint::new(y.s, PI - y.phi)).unwrap();
        prop_assert!(wrap_diff(back.s, x.s, c.length()) <= 1e-9);
        prop_assert!((PI - back.phi - phi).abs() <= 1e-9);
    }

    #[test]
    fn chord_endpoints_lie_on_curve(s in 0.0f64..1.0, phi in 0.01f64..PI - 0.01, h1 in -0.1f64..0.1) {
        let c = make_curve(CurveSpec::FourierCircle { r0: 1.0, harmonics: vec![(2, h1, 0.0), (3, 0.0, 0.02)] }).unwrap();
        let hit = collide(&c, PhasePoint::new(s * c.length(), phi)).unwrap();
        let (p, _, _) = c.geometry_at(hit.next.s);
        prop_assert!(p.distance(hit.to.point) <= 1e-9);
        // Reflection law: equal angles with the tangent on both sides.
        let t = hit.to.tangent;
        prop_assert!((hit.incoming.dot(t) - hit.outgoing.dot(t)).abs() <= 1e-12);
        prop_assert!((hit.incoming.cross(t) + hit.outgoing.cross(t)).abs() <= 1e-12);
    }
}

#[test]
fn regular_hexagon_orbit_closes() {
    let c = make_curve(CurveSpec::Circle { radius: 1.0 }).unwrap();
    let path = orbit(&c, PhasePoint::new(0.0, PI / 6.0), 6).unwrap();
    assert_eq!(path.len(), 7);
    assert!(wrap_diff(path[6].s, 0.0, TAU) <= 1e-10);
}

#[test]
fn ellipse_major_axis_is_two_periodic() {
    let c = ellipse(2.0, 1.0);
    let path = orbit(&c, PhasePoint::new(0.0, PI / 2.0), 2).unwrap();
    assert!(wrap_diff(path[1].s, c.length() / 2.0, c.length()) <= 1e-10);
    assert!(wrap_diff(path[2].s, 0.0, c.length()) <= 1e-10);
    assert!((path[2].phi - PI / 2.0).abs() <= 1e-10);
}

#[test]
fn grazing_angles_rejected() {
    let c = ellipse(2.0, 1.0);
    for phi in [0.0, PHI_MIN / 2.0, PI, -0.1] {
        assert!(next_collision(&c, PhasePoint::new(0.3, phi)).is_err(), "phi = {phi}");
    }
    // Just inside the admissible band still works.
    assert!(next_collision(&c, PhasePoint::new(0.3, 1e-6)).is_ok());
    assert!(next_collision(&c, PhasePoint::new(0.3, PI - 1e-6)).is_ok());
}
