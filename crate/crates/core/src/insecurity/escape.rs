use super::blockers::{build_moduli, BlockerSet, ModuliPlan};
use super::InsecurityError;
use crate::curve::Curve;
use crate::lazutkin::SigmaMap;
use crate::trajectory::{length_gradient, solve_min_polyline, SolveOptions, Trajectory, TrajectoryRecord};
use crate::vec2::Vec2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Reflection residual above which a stored trajectory is not accepted as
/// a billiard path.
pub const RESIDUAL_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeOptions {
    /// Minimal σ-distance between a vertex and a boundary blocker.
    pub eps_boundary: f64,
    /// Minimal Euclidean distance to interior blockers, as a fraction of
    /// the curve diameter.
    pub eps_interior_rel: f64,
    pub solve: SolveOptions,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        EscapeOptions { eps_boundary: 1e-6, eps_interior_rel: 1e-6, solve: SolveOptions::default() }
    }
}

impl EscapeOptions {
    pub fn eps_interior(&self, curve: &Curve) -> f64 {
        self.eps_interior_rel * curve.diameter()
    }
}

/// A trajectory from `A` to `B` certified to miss every blocker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeCertificate {
    #[serde(rename = "N_used")]
    pub n_used: u64,
    pub i_used: u64,
    pub n: u64,
    #[serde(rename = "Q")]
    pub q_product: u64,
    pub boundary_clearance: f64,
    #[serde(with = "super::inf_as_null")]
    pub interior_clearance: f64,
    pub eps_boundary: f64,
    pub eps_interior: f64,
    pub trajectory: TrajectoryRecord,
}

#[derive(Debug, Clone)]
pub struct EscapeOutcome {
    pub certificate: EscapeCertificate,
    pub plan: ModuliPlan,
    /// Number of candidate trajectories solved.
    pub attempts: usize,
}

/// σ-distance from each boundary blocker to the nearest interior vertex.
pub fn boundary_distances(interior_sigma: &[f64], blockers: &BlockerSet) -> Vec<f64> {
    blockers
        .boundary
        .iter()
        .map(|b| {
            let t = b.value();
            interior_sigma.iter().map(|s| (s - t).abs()).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Euclidean distance from each interior blocker to the polyline.
pub fn interior_distances(points: &[Vec2], blockers: &BlockerSet) -> Vec<f64> {
    blockers
        .interior_points()
        .iter()
        .map(|p| points.windows(2).map(|w| p.distance_to_segment(w[0], w[1])).fold(f64::INFINITY, f64::min))
        .collect()
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn check_interior(curve: &Curve, blockers: &BlockerSet) -> Result<(), InsecurityError> {
    for (index, p) in blockers.interior_points().iter().enumerate() {
        if !curve.contains(*p) {
            return Err(InsecurityError::InteriorBlockerOutside { index });
        }
    }
    Ok(())
}

struct Candidate {
    i: u64,
    n: u64,
    traj: Option<Trajectory>,
    boundary: f64,
    interior: f64,
}

/// Walks `N = N_start..=N_max` (and `i = 0..=k` within each `N`) and returns
/// the first candidate trajectory clearing every blocker.
pub fn escape_search(
    curve: &Curve,
    sm: &SigmaMap,
    blockers: &BlockerSet,
    n_start: u64,
    n_max: u64,
    opts: EscapeOptions,
) -> Result<EscapeOutcome, InsecurityError> {
    check_interior(curve, blockers)?;
    let plan = build_moduli(blockers)?;
    let eps_interior = opts.eps_interior(curve);
    let mut best_clearance: f64 = 0.0;
    let mut attempts = 0;
    for big_n in n_start..=n_max {
        let candidates = plan.candidates(big_n)?;
        debug_assert!(plan.coprime(big_n)?);
        let solved: Vec<Candidate> = candidates
            .par_iter()
            .enumerate()
            .map(|(i, &n)| {
                if n < 2 {
                    return Candidate { i: i as u64, n, traj: None, boundary: 0.0, interior: 0.0 };
                }
                match solve_min_polyline(curve, sm, n as usize, opts.solve) {
                    Ok(traj) => {
                        let boundary = min_of(&boundary_distances(traj.interior_sigma(), blockers));
                        let interior = min_of(&interior_distances(&traj.points(curve), blockers));
                        Candidate { i: i as u64, n, traj: Some(traj), boundary, interior }
                    }
                    Err(e) => {
                        log::warn!("N = {big_n}, n = {n}: {e}");
                        Candidate { i: i as u64, n, traj: None, boundary: 0.0, interior: 0.0 }
                    }
                }
            })
            .collect();
        for c in solved {
            let Some(traj) = c.traj else { continue };
            attempts += 1;
            best_clearance = best_clearance.max(c.boundary.min(1.0));
            log::debug!("N = {big_n}, i = {}, n = {}: clearance {:e} / {:e}", c.i, c.n, c.boundary, c.interior);
            if c.boundary > opts.eps_boundary && c.interior > eps_interior {
                let certificate = EscapeCertificate {
                    n_used: big_n,
                    i_used: c.i,
                    n: c.n,
                    q_product: plan.q_product,
                    boundary_clearance: c.boundary,
                    interior_clearance: c.interior,
                    eps_boundary: opts.eps_boundary,
                    eps_interior,
                    trajectory: TrajectoryRecord::from(&traj),
                };
                return Ok(EscapeOutcome { certificate, plan, attempts });
            }
        }
    }
    Err(InsecurityError::NotFound { n_max, best_clearance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    /// Per boundary blocker, σ-distance to the nearest interior vertex.
    pub boundary_distances: Vec<f64>,
    /// Per interior blocker, distance to the polyline.
    pub interior_distances: Vec<f64>,
    pub offending_boundary: Vec<usize>,
    pub offending_interior: Vec<usize>,
    pub reflection_residual: f64,
}

/// Re-derives every clearance of `cert` from its vertex arc lengths alone.
///
/// A blocked vertex or chord gives `pass = false`. A certificate whose
/// polyline clears every blocker but is not a billiard path (wrong
/// endpoints, wrong segment count, or reflection residual above
/// [`RESIDUAL_BOUND`]) is rejected as stale.
pub fn verify_certificate(
    curve: &Curve,
    sm: &SigmaMap,
    blockers: &BlockerSet,
    cert: &EscapeCertificate,
) -> Result<VerifyReport, InsecurityError> {
    let stale = |msg: String| Err(InsecurityError::StaleCertificate(msg));
    let vs = &cert.trajectory.vertex_s;
    let n = vs.len().saturating_sub(1);
    if n < 2 || n as u64 != cert.n {
        return stale(format!("expected {} segments, found {n}", cert.n));
    }
    let plan = build_moduli(blockers)?;
    let expected = plan.candidates(cert.n_used)?;
    if expected.get(cert.i_used as usize) != Some(&cert.n) {
        return stale(format!("n = {} is not candidate i = {} for N = {}", cert.n, cert.i_used, cert.n_used));
    }
    if vs.windows(2).any(|w| w[1] <= w[0]) {
        return stale("vertices are not strictly increasing".into());
    }

    let sigma: Vec<f64> = vs[1..n].iter().map(|&s| sm.sigma(s)).collect();
    let points: Vec<Vec2> = vs.iter().map(|&s| curve.geometry_at(s).0).collect();
    let boundary = boundary_distances(&sigma, blockers);
    let interior = interior_distances(&points, blockers);
    let eps_interior = cert.eps_interior.max(0.0);
    let offending_boundary: Vec<usize> =
        boundary.iter().enumerate().filter(|(_, d)| **d <= cert.eps_boundary).map(|(i, _)| i).collect();
    let offending_interior: Vec<usize> =
        interior.iter().enumerate().filter(|(_, d)| **d <= eps_interior).map(|(i, _)| i).collect();
    let residual = length_gradient(curve, vs)?.iter().fold(0.0, |a: f64, g| a.max(g.abs()));
    let pass = offending_boundary.is_empty() && offending_interior.is_empty();
    let report = VerifyReport {
        pass,
        boundary_distances: boundary,
        interior_distances: interior,
        offending_boundary,
        offending_interior,
        reflection_residual: residual,
    };
    if !pass {
        return Ok(report);
    }
    let arc = sm.arc();
    let tol = 1e-12 * curve.length();
    if (vs[0] - arc.s_a).abs() > tol || (vs[n] - arc.s_b).abs() > tol {
        return stale("endpoints do not match the arc".into());
    }
    if !(residual <= RESIDUAL_BOUND) {
        return stale(format!("reflection residual {residual:e} exceeds {RESIDUAL_BOUND:e}"));
    }
    Ok(report)
}
