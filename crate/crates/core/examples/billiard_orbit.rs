//! Iterates the billiard map on an ellipse and checks area preservation of
//! the map along the way.
//!
//! Run with `cargo run --example billiard_orbit`.

use billiard_lab::billiard::orbit_csv;
use billiard_lab::{make_curve, orbit, symplectic_check, CurveSpec, PhasePoint};
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let circle = make_curve(CurveSpec::Circle { radius: 1.0 })?;
    let hexagon = orbit(&circle, PhasePoint::new(0.0, PI / 6.0), 6)?;
    println!("circle, phi = π/6 (closes after 6 bounces):");
    print!("{}", orbit_csv(&circle, &hexagon));

    let ellipse = make_curve(CurveSpec::Ellipse { a: 2.0, b: 1.0 })?;
    let path = orbit(&ellipse, PhasePoint::new(0.3, 0.4), 12)?;
    println!("\nellipse (2, 1):");
    println!("{:>3} {:>10} {:>10} {:>14}", "k", "s", "phi", "|det DF| − 1");
    for (k, x) in path.iter().enumerate() {
        let ratio = symplectic_check(&ellipse, *x, 1e-5)?;
        println!("{k:>3} {:>10.6} {:>10.6} {:>14.3e}", x.s, x.phi, ratio - 1.0);
    }
    Ok(())
}
