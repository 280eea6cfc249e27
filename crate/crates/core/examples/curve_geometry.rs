//! Builds the three supported curve families and prints their length,
//! diameter and a few curvature samples, plus the Lazutkin mass of a
//! quarter arc.
//!
//! Run with `cargo run --example curve_geometry`.

use billiard_lab::{build_sigma, make_curve, ArcSpec, CurveSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        CurveSpec::Circle { radius: 1.0 },
        CurveSpec::Ellipse { a: 2.0, b: 1.0 },
        CurveSpec::FourierCircle { r0: 1.0, harmonics: vec![(2, 0.05, 0.0), (3, 0.0, 0.02)] },
    ];
    for spec in specs {
        let curve = make_curve(spec)?;
        let sm = build_sigma(&curve, ArcSpec::quarter(&curve))?;
        println!("{:?}", curve.spec());
        println!("  length {:.15}  diameter {:.15}", curve.length(), curve.diameter());
        println!("  quarter arc: s ∈ [{:.6}, {:.6}], S_tot {:.15}", sm.arc().s_a, sm.arc().s_b, sm.total_mass());
        for i in 0..4 {
            let s = curve.length() * i as f64 / 8.0;
            let (p, _, k) = curve.geometry_at(s);
            println!("  s = {s:.4}: ({:+.6}, {:+.6}) k = {k:.6}", p.x, p.y);
        }
    }

    // Non-convex input is refused.
    let wobbly = CurveSpec::FourierCircle { r0: 1.0, harmonics: vec![(4, 0.2, 0.0)] };
    println!("strong 4th harmonic: {}", make_curve(wobbly).unwrap_err());
    Ok(())
}
