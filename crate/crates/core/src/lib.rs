//! Numerical laboratory for near-boundary billiard trajectories on smooth
//! convex tables.
//!
//! The crate computes the ordered inscribed billiard polylines `T_n` joining
//! two boundary points `A` and `B` along a convex arc, measures how closely
//! their vertices follow the equipartition of the Lazutkin parameter
//! `dσ = ½ k^{2/3} ds`, and runs the arithmetic construction that picks a
//! segment count `n` whose trajectory misses any given finite set of
//! blockers.
//!
//! Modules, bottom up:
//!
//! - [`curve`]: convex table boundaries with arc-length tables.
//! - [`billiard`]: the billiard ball map and its area-preservation check.
//! - [`lazutkin`]: the σ parameter and the leading-order Hamiltonian.
//! - [`trajectory`]: the length-critical inscribed polylines.
//! - [`insecurity`]: equidistribution scans and escape certificates.
//! - [`harness`]: JSON experiment configs and artifact writers behind the
//!   `bil` binary.

pub mod billiard;
pub mod curve;
pub mod harness;
pub mod insecurity;
pub mod lazutkin;
mod quadrature;
pub mod trajectory;
pub mod vec2;

pub use billiard::{next_collision, orbit, symplectic_check, PhasePoint};
pub use curve::{make_curve, ArcSpec, Curve, CurveSpec};
pub use lazutkin::{build_sigma, SigmaMap};
pub use trajectory::{solve_min_polyline, SolveOptions, Trajectory};
pub use vec2::Vec2;

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
