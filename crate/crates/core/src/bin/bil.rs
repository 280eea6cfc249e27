use billiard_lab::harness::{parse_config, run_experiment, HarnessError};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bil", version, about = "Billiard experiments driven by JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Arc length, diameter, curvature samples and Lazutkin mass.
    CurveInfo(Common),
    /// Iterate the billiard map from (s0, phi0).
    Orbit(Common),
    /// Solve for the critical inscribed polyline with n segments.
    Trajectory(Common),
    /// Lazutkin equidistribution scan over n_list.
    Equidist(Common),
    /// Search for a trajectory that avoids a blocker set.
    Escape(Common),
    /// Re-check an escape certificate.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let (requested, args) = match cli.command {
        Cmd::CurveInfo(a) => ("curve-info", a),
        Cmd::Orbit(a) => ("orbit", a),
        Cmd::Trajectory(a) => ("trajectory", a),
        Cmd::Equidist(a) => ("equidist", a),
        Cmd::Escape(a) => ("escape", a),
        Cmd::Verify(a) => ("verify", a),
    };
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| HarnessError::Io { path: args.config.clone(), source })?;
    let config = parse_config(&text)?;
    let found = config.command().name();
    if found != requested {
        return Err(HarnessError::CommandMismatch { requested: requested.into(), found: found.into() });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.max(1))
        .build()
        .map_err(|e| HarnessError::Module { path: "threads".into(), message: e.to_string() })?;
    let manifest = pool.install(|| run_experiment(&config, &args.out))?;
    log::info!("wrote {} files to {} in {:.3}s", manifest.files.len(), args.out.display(), manifest.runtime_seconds);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BIL_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
