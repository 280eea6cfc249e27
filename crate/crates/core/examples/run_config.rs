//! Runs a JSON experiment config through the same harness as the `bil`
//! binary and lists the artifacts it wrote.
//!
//! Run with `cargo run --example run_config -- CONFIG.json [OUT_DIR]`; with
//! no arguments a built-in equidistribution config is used.

use billiard_lab::harness::{parse_config, run_experiment};
use std::path::PathBuf;

const DEFAULT: &str = r#"{
  "curve": {"kind": "ellipse", "a": 2.0, "b": 1.0},
  "arc": {"quarter": true},
  "equidist": {"n_list": [8, 16, 32, 64]}
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("bil-example"));
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            println!("{}", e.to_json());
            std::process::exit(e.exit_code());
        }
    };
    let manifest = run_experiment(&config, &out)?;
    println!("{} (config {}) in {:.3} s", manifest.command, manifest.config_hash, manifest.runtime_seconds);
    for f in &manifest.files {
        println!("  {}", out.join(f).display());
    }
    Ok(())
}
