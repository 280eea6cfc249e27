//! Measures how fast the vertices of `T_n` approach the σ-equipartition on
//! the quarter arc of the (2, 1) ellipse.
//!
//! Run with `cargo run --release --example equidistribution`.

use billiard_lab::insecurity::equidistribution_scan;
use billiard_lab::{build_sigma, make_curve, ArcSpec, CurveSpec, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let curve = make_curve(CurveSpec::Ellipse { a: 2.0, b: 1.0 })?;
    let sm = build_sigma(&curve, ArcSpec::quarter(&curve))?;
    let n_list = [8, 16, 32, 64, 128, 256];
    let table = equidistribution_scan(&curve, &sm, &n_list, SolveOptions::default())?;

    println!(
        "{:>5} {:>12} {:>10} {:>10} {:>12} {:>12} {:>12}",
        "n", "D_n", "n²D_n", "phi_max", "H_spread", "n²·spread", "dσ dev"
    );
    for r in &table.rows {
        let shift = r.shift.as_ref().map(|s| s.max_dsigma_dev).unwrap_or(f64::NAN);
        println!(
            "{:>5} {:>12.4e} {:>10.5} {:>10.6} {:>12.4e} {:>12.5} {:>12.4e}",
            r.n,
            r.d_n,
            r.n2_dn,
            r.phi_max,
            r.h_spread,
            r.h_spread * (r.n * r.n) as f64,
            shift
        );
    }
    println!("slope(D_n)     = {:?}", table.slope);
    println!("slope(phi_max) = {:?}", table.phi_slope);
    println!("C_hat          = {:.6}", table.c_hat);
    Ok(())
}
