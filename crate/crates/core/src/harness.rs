//! JSON experiment configs and the artifact writers behind the `bil`
//! binary.
//!
//! A config names a curve, optionally an arc, and exactly one command
//! block. Running it writes the command's CSV/JSON artifacts plus a
//! `manifest.json` into an output directory. Every artifact carries the
//! SHA-256 of the normalized config; payloads are deterministic, only the
//! manifest records wall-clock data.

use crate::billiard::{orbit, orbit_csv, BilliardError, PhasePoint};
use crate::curve::{make_curve, ArcSpec, Curve, CurveError, CurveSpec};
use crate::insecurity::{
    build_moduli, collision_bounds_check, compute_delta, equidistribution_scan, escape_search, verify_certificate,
    BlockerSet, BoundsReport, DeltaReport, EscapeCertificate, EscapeOptions, InsecurityError, VerifyReport,
};
use crate::lazutkin::{build_sigma, shift_consistency, SigmaMap};
use crate::trajectory::{
    max_distance_to_arc, shooting_mismatch, solve_min_polyline, SolveOptions, TrajectoryError, TrajectoryRecord,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

pub const TOOL_NAME: &str = "bil";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `n` values used to estimate `Ĉ` for the bounds check when an escape
/// config does not supply one.
const C_HAT_SCAN: [usize; 4] = [8, 16, 32, 64];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<ValidationError>),
    #[error("config holds a `{found}` block but `{requested}` was requested")]
    CommandMismatch { requested: String, found: String },
    #[error("{path}: {message}")]
    Module { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("certificate failed verification (offending boundary {boundary:?}, interior {interior:?})")]
    VerificationFailed { boundary: Vec<usize>, interior: Vec<usize> },
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Parse { .. } => "parse",
            HarnessError::Validation(_) => "validation",
            HarnessError::CommandMismatch { .. } => "command_mismatch",
            HarnessError::Module { .. } => "module",
            HarnessError::Io { .. } => "io",
            HarnessError::VerificationFailed { .. } => "verification_failed",
        }
    }

    /// Machine-readable error document.
    pub fn to_json(&self) -> Value {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            HarnessError::Parse { line, column, .. } => {
                body["line"] = json!(line);
                body["column"] = json!(column);
            }
            HarnessError::Validation(errors) => body["errors"] = json!(errors),
            HarnessError::Module { path, .. } => body["path"] = json!(path),
            HarnessError::VerificationFailed { boundary, interior } => {
                body["offending_boundary"] = json!(boundary);
                body["offending_interior"] = json!(interior);
            }
            _ => {}
        }
        json!({ "error": body })
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Validation(_) | HarnessError::CommandMismatch { .. } => 2,
            HarnessError::VerificationFailed { .. } => 3,
            _ => 1,
        }
    }
}

fn module_err(path: &str, e: impl fmt::Display) -> HarnessError {
    HarnessError::Module { path: path.to_string(), message: e.to_string() }
}

impl From<CurveError> for HarnessError {
    fn from(e: CurveError) -> Self {
        module_err("curve", e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArcConfig {
    Explicit {
        #[serde(rename = "s_A")]
        s_a: f64,
        #[serde(rename = "s_B")]
        s_b: f64,
    },
    Quarter {
        quarter: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveInfoBlock {
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitBlock {
    pub s0: f64,
    pub phi0: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryBlock {
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquidistBlock {
    pub n_list: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeBlock {
    pub blockers: BlockerSet,
    #[serde(rename = "N_start", default = "default_n_start")]
    pub n_start: u64,
    #[serde(rename = "N_max")]
    pub n_max: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_boundary: Option<f64>,
    /// Interior clearance as a fraction of the curve diameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_interior_rel: Option<f64>,
    /// Equidistribution constant for the bounds check; estimated by a
    /// short scan when absent.
    #[serde(rename = "C_hat", default, skip_serializing_if = "Option::is_none")]
    pub c_hat: Option<f64>,
}

fn default_n_start() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    pub certificate: PathBuf,
}

/// A config as written, after schema checks. Its JSON form is what gets
/// hashed and echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub curve: CurveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc: Option<ArcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_info: Option<CurveInfoBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equidist: Option<EquidistBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape: Option<EscapeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBlock>,
}

/// The single command a config asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CurveInfo,
    Orbit,
    Trajectory,
    Equidist,
    Escape,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CurveInfo => "curve-info",
            Command::Orbit => "orbit",
            Command::Trajectory => "trajectory",
            Command::Equidist => "equidist",
            Command::Escape => "escape",
            Command::Verify => "verify",
        }
    }

    fn needs_arc(self) -> bool {
        !matches!(self, Command::CurveInfo | Command::Orbit | Command::Verify)
    }
}

impl ExperimentConfig {
    pub fn command(&self) -> Command {
        self.commands()[0]
    }

    fn commands(&self) -> Vec<Command> {
        let mut out = vec![];
        if self.curve_info.is_some() {
            out.push(Command::CurveInfo);
        }
        if self.orbit.is_some() {
            out.push(Command::Orbit);
        }
        if self.trajectory.is_some() {
            out.push(Command::Trajectory);
        }
        if self.equidist.is_some() {
            out.push(Command::Equidist);
        }
        if self.escape.is_some() {
            out.push(Command::Escape);
        }
        if self.verify.is_some() {
            out.push(Command::Verify);
        }
        out
    }

    /// SHA-256 (hex) of the normalized JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn validate(&self) -> Vec<ValidationError> {
        let mut errors = vec![];
        let mut err = |path: &str, reason: String| errors.push(ValidationError { path: path.into(), reason });
        if let Err(e) = self.curve.validate() {
            let reason = match e {
                CurveError::InvalidSpec(r) => r,
                other => other.to_string(),
            };
            err("curve", reason);
        }
        let commands = self.commands();
        if commands.len() != 1 {
            err("", format!("exactly one command block required (found {})", commands.len()));
        }
        match &self.arc {
            Some(ArcConfig::Quarter { quarter: false }) => err("arc.quarter", "must be true when given".into()),
            Some(ArcConfig::Explicit { s_a, s_b }) if !(s_a.is_finite() && s_b.is_finite() && s_b > s_a) => {
                err("arc", "s_A < s_B required".into())
            }
            None if commands.iter().any(|c| c.needs_arc()) => err("arc", "arc required for this command".into()),
            _ => {}
        }
        if let Some(b) = &self.curve_info {
            if b.samples == 0 {
                err("curve_info.samples", "must be positive".into());
            }
        }
        if let Some(o) = &self.orbit {
            if !(o.phi0 > 0.0 && o.phi0 < std::f64::consts::PI) {
                err("orbit.phi0", "0 < phi0 < π required".into());
            }
            if o.steps == 0 {
                err("orbit.steps", "must be positive".into());
            }
            if !o.s0.is_finite() {
                err("orbit.s0", "must be finite".into());
            }
        }
        if let Some(t) = &self.trajectory {
            if t.n < 2 {
                err("trajectory.n", "n ≥ 2 required".into());
            }
        }
        if let Some(e) = &self.equidist {
            if e.n_list.is_empty() {
                err("equidist.n_list", "must not be empty".into());
            }
            if e.n_list.iter().any(|&n| n < 4) {
                err("equidist.n_list", "every n must be ≥ 4".into());
            }
            if e.n_list.windows(2).any(|w| w[1] <= w[0]) {
                err("equidist.n_list", "must be strictly increasing".into());
            }
        }
        if let Some(e) = &self.escape {
            if let Err(x) = e.blockers.clone().validated() {
                err("escape.blockers", x.to_string());
            }
            if e.n_max < e.n_start {
                err("escape.N_max", "N_max ≥ N_start required".into());
            }
            for (path, v) in [
                ("escape.eps_boundary", e.eps_boundary),
                ("escape.eps_interior_rel", e.eps_interior_rel),
                ("escape.C_hat", e.c_hat),
            ] {
                if let Some(v) = v {
                    if !(v > 0.0 && v.is_finite()) {
                        err(path, "must be positive".into());
                    }
                }
            }
        }
        errors
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
        if e.is_data() {
            HarnessError::Validation(vec![ValidationError { path: String::new(), reason: e.to_string() }])
        } else {
            HarnessError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
        }
    })?;
    let errors = config.validate();
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(HarnessError::Validation(errors))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub files: Vec<String>,
    pub runtime_seconds: f64,
    pub finished_unix: u64,
}

struct Writer<'a> {
    dir: &'a Path,
    hash: String,
    files: Vec<String>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| HarnessError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, mut value: Value) -> Result<(), HarnessError> {
        if let Value::Object(map) = &mut value {
            map.insert("config_hash".into(), json!(self.hash));
        }
        let text = serde_json::to_string_pretty(&value).expect("json serializes") + "\n";
        self.write(name, &text)
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<(), HarnessError> {
        let text = format!("# config_hash={}\n{body}", self.hash);
        self.write(name, &text)
    }
}

fn resolve_arc(curve: &Curve, arc: &Option<ArcConfig>) -> Result<Option<ArcSpec>, HarnessError> {
    match arc {
        None => Ok(None),
        Some(ArcConfig::Quarter { .. }) => Ok(Some(ArcSpec::quarter(curve))),
        Some(ArcConfig::Explicit { s_a, s_b }) => {
            Ok(Some(ArcSpec::new(curve, *s_a, *s_b).map_err(|e| module_err("arc", e))?))
        }
    }
}

fn setup(config: &ExperimentConfig) -> Result<(Curve, Option<SigmaMap>), HarnessError> {
    let curve = make_curve(config.curve.clone())?;
    let sm = match resolve_arc(&curve, &config.arc)? {
        Some(arc) => Some(build_sigma(&curve, arc).map_err(|e| module_err("arc", e))?),
        None => None,
    };
    Ok((curve, sm))
}

/// Runs the config's command and writes its artifacts into `out_dir`.
///
/// Parallel work runs on the current rayon pool; wrap the call in
/// `ThreadPool::install` to bound it.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Manifest, HarnessError> {
    let started = Instant::now();
    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io { path: out_dir.to_path_buf(), source })?;
    let mut w = Writer { dir: out_dir, hash: config.hash(), files: vec![] };
    let command = config.command();
    log::info!("running {} (config {})", command.name(), w.hash);
    match command {
        Command::CurveInfo => run_curve_info(config, &mut w)?,
        Command::Orbit => run_orbit(config, &mut w)?,
        Command::Trajectory => run_trajectory(config, &mut w)?,
        Command::Equidist => run_equidist(config, &mut w)?,
        Command::Escape => run_escape(config, &mut w)?,
        Command::Verify => run_verify(config, &mut w)?,
    }
    let mut files = w.files.clone();
    files.push("manifest.json".into());
    let manifest = Manifest {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        command: command.name().into(),
        config_hash: w.hash.clone(),
        config: config.clone(),
        files,
        runtime_seconds: started.elapsed().as_secs_f64(),
        finished_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, text).map_err(|source| HarnessError::Io { path, source })?;
    Ok(manifest)
}

fn run_curve_info(config: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let samples = config.curve_info.as_ref().map_or(default_samples(), |b| b.samples);
    let (curve, sm) = setup(config)?;
    let rows: Vec<Value> = (0..samples)
        .map(|i| {
            let s = curve.length() * i as f64 / samples as f64;
            let (p, t, k) = curve.geometry_at(s);
            json!({ "s": s, "x": p.x, "y": p.y, "tx": t.x, "ty": t.y, "curvature": k })
        })
        .collect();
    let arc = sm.as_ref().map(|sm| json!({ "s_A": sm.arc().s_a, "s_B": sm.arc().s_b, "S_tot": sm.total_mass() }));
    w.json(
        "curve_info.json",
        json!({ "curve": config.curve, "length": curve.length(), "diameter": curve.diameter(), "arc": arc, "samples": rows }),
    )
}

fn run_orbit(config: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let block = config.orbit.as_ref().expect("orbit block");
    let curve = make_curve(config.curve.clone())?;
    let x0 = PhasePoint::new(block.s0.rem_euclid(curve.length()), block.phi0);
    let path = orbit(&curve, x0, block.steps).map_err(|e: BilliardError| module_err("orbit", e))?;
    w.csv("orbit.csv", &orbit_csv(&curve, &path))
}

fn solve_err(path: &str, e: TrajectoryError) -> HarnessError {
    module_err(path, e)
}

fn run_trajectory(config: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let n = config.trajectory.as_ref().expect("trajectory block").n;
    let (curve, sm) = setup(config)?;
    let sm = sm.expect("validated arc");
    let traj = solve_min_polyline(&curve, &sm, n, SolveOptions::default()).map_err(|e| solve_err("trajectory", e))?;
    let shift = shift_consistency(&sm, &traj);
    let shooting = shooting_mismatch(&curve, &traj).map_err(|e| module_err("trajectory", e))?;
    let mut value = serde_json::to_value(TrajectoryRecord::from(&traj)).expect("record serializes");
    value["phi_list"] = json!(traj.phi_list);
    value["boundary_sticking"] = json!(traj.boundary_sticking);
    value["shooting_mismatch"] = json!(shooting);
    value["max_distance_to_arc"] = json!(max_distance_to_arc(&curve, &traj));
    value["shift_consistency"] = json!(shift);
    w.json("trajectory.json", value)?;
    w.csv("trajectory.csv", &traj.to_csv(&curve))
}

fn run_equidist(config: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let n_list = &config.equidist.as_ref().expect("equidist block").n_list;
    let (curve, sm) = setup(config)?;
    let sm = sm.expect("validated arc");
    let table =
        equidistribution_scan(&curve, &sm, n_list, SolveOptions::default()).map_err(|e| module_err("equidist", e))?;
    w.csv("deviation_table.csv", &table.to_csv())?;
    let mut lines = String::new();
    for r in &table.rows {
        if let Some(shift) = &r.shift {
            let mut v = serde_json::to_value(shift).expect("shift serializes");
            v["config_hash"] = json!(w.hash);
            lines.push_str(&serde_json::to_string(&v).expect("json"));
            lines.push('\n');
        }
    }
    w.write("shift_consistency.jsonl", &lines)?;
    w.json(
        "equidist.json",
        json!({
            "slope": table.slope,
            "phi_slope": table.phi_slope,
            "C_hat": table.c_hat,
            "C_hat_note": "empirical sup of n²·D_n over the scanned n",
            "degenerate": table.degenerate,
            "note": table.note,
            "rows": table.rows,
        }),
    )
}

/// Contents of `certificate.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub config_hash: String,
    pub curve: CurveSpec,
    pub arc: ArcSpec,
    pub blockers: BlockerSet,
    pub certificate: EscapeCertificate,
}

fn run_escape(config: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let block = config.escape.as_ref().expect("escape block");
    let (curve, sm) = setup(config)?;
    let sm = sm.expect("validated arc");
    let blockers = block.blockers.clone().validated().map_err(|e| module_err("escape.blockers", e))?;
    let mut opts = EscapeOptions::default();
    if let Some(eps) = block.eps_boundary {
        opts.eps_boundary = eps;
    }
    if let Some(eps) = block.eps_interior_rel {
        opts.eps_interior_rel = eps;
    }
    let escape_err = |e: InsecurityError| module_err("escape", e);
    let plan = build_moduli(&blockers).map_err(escape_err)?;
    let delta: DeltaReport = compute_delta(&blockers, &plan).map_err(escape_err)?;
    let outcome = escape_search(&curve, &sm, &blockers, block.n_start, block.n_max, opts).map_err(escape_err)?;
    let cert = outcome.certificate;

    let (c_hat, c_hat_source) = match block.c_hat {
        Some(c) => (c, "config"),
        None => {
            let table = equidistribution_scan(&curve, &sm, &C_HAT_SCAN, SolveOptions::default()).map_err(escape_err)?;
            (table.c_hat, "empirical sup of n²·D_n over n ∈ {8, 16, 32, 64}")
        }
    };
    let bounds: Option<BoundsReport> = match collision_bounds_check(delta.delta, plan.q_product, cert.n_used, c_hat) {
        Ok(b) => Some(b),
        Err(InsecurityError::InfiniteDelta) => None,
        Err(e) => return Err(escape_err(e)),
    };
    let file = CertificateFile {
        config_hash: w.hash.clone(),
        curve: config.curve.clone(),
        arc: *sm.arc(),
        blockers,
        certificate: cert.clone(),
    };
    let text = serde_json::to_string_pretty(&file).expect("certificate serializes") + "\n";
    w.write("certificate.json", &text)?;
    w.json(
        "escape_report.json",
        json!({
            "plan": plan,
            "candidates": plan.candidates(cert.n_used).map_err(escape_err)?,
            "attempts": outcome.attempts,
            "delta": delta,
            "C_hat": c_hat,
            "C_hat_source": c_hat_source,
            "bounds": bounds,
            "bounds_note": if bounds.is_none() { Some("no irrational blockers: escape follows from coprimality alone") } else { None },
        }),
    )
}

/// Loads a `certificate.json` and re-checks it from scratch.
pub fn verify_certificate_file(path: &Path) -> Result<(CertificateFile, VerifyReport), HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    let file: CertificateFile = serde_json::from_str(&text).map_err(|e| module_err("verify.certificate", e))?;
    let curve = make_curve(file.curve.clone())?;
    let sm = build_sigma(&curve, file.arc).map_err(|e| module_err("verify.arc", e))?;
    let blockers = file.blockers.clone().validated().map_err(|e| module_err("verify.blockers", e))?;
    let report = verify_certificate(&curve, &sm, &blockers, &file.certificate).map_err(|e| module_err("verify", e))?;
    Ok((file, report))
}

fn run_verify(config: &ExperimentConfig, w: &mut Writer) -> Result<(), HarnessError> {
    let path = &config.verify.as_ref().expect("verify block").certificate;
    let (file, report) = verify_certificate_file(path)?;
    w.json("verification.json", json!({ "certificate_config_hash": file.config_hash, "report": report }))?;
    if report.pass {
        Ok(())
    } else {
        Err(HarnessError::VerificationFailed {
            boundary: report.offending_boundary,
            interior: report.offending_interior,
        })
    }
}
