//! Finds a billiard path between the endpoints of an arc that misses a
//! finite set of blocking points, then re-verifies the certificate.
//!
//! Run with `cargo run --release --example escape`.

use billiard_lab::insecurity::{
    build_moduli, collision_bounds_check, compute_delta, equidistribution_scan, escape_search, verify_certificate,
    BlockerSet, BoundaryBlocker, EscapeOptions,
};
use billiard_lab::{build_sigma, make_curve, ArcSpec, CurveSpec, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Circle: only rational blockers, so coprimality alone does the job.
    let circle = make_curve(CurveSpec::Circle { radius: 1.0 })?;
    let arc = build_sigma(&circle, ArcSpec::new(&circle, 0.0, 1.0)?)?;
    let blockers = BlockerSet::new(vec![BoundaryBlocker::Rational(1, 2), BoundaryBlocker::Rational(2, 3)], vec![])?;
    let out = escape_search(&circle, &arc, &blockers, 1, 20, EscapeOptions::default())?;
    let c = &out.certificate;
    println!(
        "circle {{1/2, 2/3}}: n = {} (N = {}, i = {}), clearance {:.6}",
        c.n, c.n_used, c.i_used, c.boundary_clearance
    );

    // Ellipse: rational, irrational and interior blockers.
    let ellipse = make_curve(CurveSpec::Ellipse { a: 2.0, b: 1.0 })?;
    let sm = build_sigma(&ellipse, ArcSpec::quarter(&ellipse))?;
    let blockers = BlockerSet::new(
        vec![
            BoundaryBlocker::Rational(1, 2),
            BoundaryBlocker::Rational(2, 3),
            BoundaryBlocker::Irrational(std::f64::consts::FRAC_1_SQRT_2),
        ],
        vec![[0.5, 0.25]],
    )?;
    let plan = build_moduli(&blockers)?;
    let delta = compute_delta(&blockers, &plan)?;
    println!(
        "\nQ = {}, δ = {:.7} (witness {:?})",
        plan.q_product,
        delta.delta,
        delta.witness.map(|w| (w.numerator, w.denominator))
    );

    let out = escape_search(&ellipse, &sm, &blockers, 1, 50, EscapeOptions::default())?;
    let c = &out.certificate;
    println!(
        "ellipse: n = {} after {} attempts, boundary clearance {:.4e}, interior clearance {:.4e}",
        c.n, out.attempts, c.boundary_clearance, c.interior_clearance
    );
    let report = verify_certificate(&ellipse, &sm, &blockers, c)?;
    println!("independent verification: pass = {}, residual {:.2e}", report.pass, report.reflection_residual);

    let c_hat = equidistribution_scan(&ellipse, &sm, &[8, 16, 32, 64], SolveOptions::default())?.c_hat;
    let bounds = collision_bounds_check(delta.delta, plan.q_product, c.n_used, c_hat)?;
    println!(
        "bounds at N = {}: δQ²N/2 = {:.4} vs 3Ĉ = {:.4}; lower bound dominates from N = {}",
        c.n_used, bounds.lower, bounds.upper, bounds.n_threshold
    );
    Ok(())
}
