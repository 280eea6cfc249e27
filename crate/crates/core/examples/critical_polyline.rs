//! Solves for the inscribed billiard polylines `T_n` on the quarter arc of
//! the (2, 1) ellipse, compares small `n` against an exhaustive grid search
//! and shoots the result through the billiard map.
//!
//! Run with `cargo run --release --example critical_polyline`.

use billiard_lab::lazutkin::shift_consistency;
use billiard_lab::trajectory::{brute_force_min, shooting_mismatch};
use billiard_lab::{build_sigma, make_curve, solve_min_polyline, ArcSpec, CurveSpec, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let curve = make_curve(CurveSpec::Ellipse { a: 2.0, b: 1.0 })?;
    let sm = build_sigma(&curve, ArcSpec::quarter(&curve))?;

    for n in [2, 3] {
        let t = solve_min_polyline(&curve, &sm, n, SolveOptions::default())?;
        let b = brute_force_min(&curve, &sm, n, 2001)?;
        println!("n = {n}: Newton {:.15} vs grid {:.15}", t.total_length, b.total_length);
        println!("        vertices {:?}\n        grid     {:?}", t.vertex_s, b.vertex_s);
    }

    println!("\n{:>5} {:>6} {:>18} {:>10} {:>10} {:>10}", "n", "iters", "length", "residual", "shooting", "dσ dev");
    for n in [4, 16, 64, 256, 1024] {
        let t = solve_min_polyline(&curve, &sm, n, SolveOptions::default())?;
        let shoot = shooting_mismatch(&curve, &t)?;
        let shift = shift_consistency(&sm, &t);
        println!(
            "{n:>5} {:>6} {:>18.15} {:>10.2e} {:>10.2e} {:>10.2e}",
            t.iterations, t.total_length, t.reflection_residual, shoot, shift.max_dsigma_dev
        );
    }
    Ok(())
}
