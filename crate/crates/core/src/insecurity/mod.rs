//! Equidistribution measurements and the arithmetic escape construction
//! that defeats any finite set of blockers.

mod blockers;
mod equidist;
mod escape;

pub use blockers::{
    build_moduli, collision_bounds_check, compute_delta, gcd, BlockerSet, BoundaryBlocker, BoundsReport, DeltaReport,
    DeltaWitness, ModuliPlan,
};
pub use equidist::{equidistribution_scan, fit_loglog_slope, DeviationRow, DeviationTable, NOISE_FLOOR};
pub use escape::{
    boundary_distances, escape_search, interior_distances, verify_certificate, EscapeCertificate, EscapeOptions,
    EscapeOutcome, VerifyReport, RESIDUAL_BOUND,
};

use crate::curve::CurveError;
use crate::trajectory::TrajectoryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InsecurityError {
    #[error("boundary blocker {index}: {reason}")]
    InvalidBlocker { index: usize, reason: String },
    #[error("interior blocker {index} is not strictly inside the table")]
    InteriorBlockerOutside { index: usize },
    #[error("integer overflow while computing {what}")]
    Overflow { what: &'static str },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("no irrational blockers: delta is infinite and the bounds check does not apply")]
    InfiniteDelta,
    #[error("no certificate found up to N = {n_max} (best boundary clearance {best_clearance:e})")]
    NotFound { n_max: u64, best_clearance: f64 },
    #[error("stale certificate: {0}")]
    StaleCertificate(String),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Serializes non-finite floats as `null` and reads `null` back as `+∞`.
pub(crate) mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
