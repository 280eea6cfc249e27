//! The billiard ball map on phase coordinates `(s, φ)`.
//!
//! `s` is arc length and `φ ∈ (0, π)` the angle between the inward velocity
//! and the counterclockwise tangent. In the coordinates `(s, y)` with
//! `y = -cos φ` the invariant area form is `dy ∧ ds`.

use crate::curve::{Curve, Frame};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt::Write;
use thiserror::Error;

/// Admitted angles are `(PHI_MIN, π - PHI_MIN)`.
pub const PHI_MIN: f64 = 1e-8;
const SCAN_SAMPLES: usize = 256;
const MIN_CHORD: f64 = 1e-12;
pub const DEFAULT_SYMPLECTIC_STEP: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BilliardError {
    #[error("angle {phi} outside the admitted range")]
    InvalidPhase { phi: f64 },
    #[error("intersection solver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("degenerate chord of length {length:e}")]
    DegenerateChord { length: f64 },
    #[error("step {index}: {source}")]
    Orbit {
        index: usize,
        #[source]
        source: Box<BilliardError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(s: f64, phi: f64) -> Self {
        PhasePoint { s, phi }
    }
}

/// One application of the map together with the geometry it used.
#[derive(Debug, Clone, Copy)]
pub struct Collision {
    pub from: Frame,
    pub to: Frame,
    /// Unit direction of the chord.
    pub incoming: Vec2,
    /// Unit direction after reflection at `to`.
    pub outgoing: Vec2,
    pub next: PhasePoint,
}

fn check_phase(phi: f64) -> Result<(), BilliardError> {
    if phi > PHI_MIN && phi < PI - PHI_MIN {
        Ok(())
    } else {
        Err(BilliardError::InvalidPhase { phi })
    }
}

/// Follows the chord leaving `x` and reflects at the next boundary point.
pub fn collide(curve: &Curve, x: PhasePoint) -> Result<Collision, BilliardError> {
    check_phase(x.phi)?;
    let from = curve.frame(x.s);
    let t0 = from.t;
    let p = from.point;
    let dir = from.tangent * x.phi.cos() + from.normal * x.phi.sin();
    // Signed side of γ(t0 + τ) relative to the ray: negative just after the
    // launch point, positive after the exit point, on a convex curve.
    let side = |tau: f64| dir.cross(curve.position_t(t0 + tau) - p);

    let h = TAU / SCAN_SAMPLES as f64;
    let mut lo = 0.0;
    let mut hi = f64::NAN;
    for k in 1..SCAN_SAMPLES {
        let tau = h * k as f64;
        if side(tau) > 0.0 {
            hi = tau;
            break;
        }
        lo = tau;
    }
    // Near-grazing backward shots (φ close to π) exit within the last scan
    // interval; close in on τ = 2π geometrically.
    let mut d = h;
    while hi.is_nan() && d > 1e-15 {
        d *= 0.5;
        if side(TAU - d) > 0.0 {
            hi = TAU - d;
        } else {
            lo = TAU - d;
        }
    }
    if hi.is_nan() {
        return Err(BilliardError::NoConvergence { residual: f64::INFINITY });
    }
    // Osculating-circle estimate of the exit parameter.
    let guess = 2.0 * x.phi.sin() / (from.curvature * curve.speed_t(t0));
    let guess = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    let tau = polish(&side, |tau| dir.cross(curve.derivative_t(t0 + tau)), lo, hi, guess);
    let residual = side(tau).abs();
    if !(residual <= 1e-13 * curve.diameter()) {
        return Err(BilliardError::NoConvergence { residual });
    }

    let to = curve.frame_t(t0 + tau);
    let length = to.point.distance(p);
    if length < MIN_CHORD {
        return Err(BilliardError::DegenerateChord { length });
    }
    let incoming = (to.point - p).normalize();
    let outgoing = incoming - to.normal * (2.0 * incoming.dot(to.normal));
    let phi = to.tangent.cross(outgoing).atan2(to.tangent.dot(outgoing));
    let s = curve.s_of_t(t0 + tau).rem_euclid(curve.length());
    Ok(Collision { from, to, incoming, outgoing, next: PhasePoint { s, phi } })
}

/// Bisection-safeguarded Newton for a root with `f < 0` on the left of the
/// bracket and `f > 0` on the right.
fn polish<F, D>(f: &F, deriv: D, mut lo: f64, mut hi: f64, mut x: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / deriv(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON {
            break;
        }
    }
    x
}

/// The billiard ball map `F`.
pub fn next_collision(curve: &Curve, x: PhasePoint) -> Result<PhasePoint, BilliardError> {
    collide(curve, x).map(|c| c.next)
}

/// `x0, F(x0), …, F^n(x0)`.
pub fn orbit(curve: &Curve, x0: PhasePoint, n: usize) -> Result<Vec<PhasePoint>, BilliardError> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(x0);
    let mut x = x0;
    for index in 0..n {
        x = next_collision(curve, x).map_err(|e| BilliardError::Orbit { index, source: Box::new(e) })?;
        out.push(x);
    }
    Ok(out)
}

/// Central-difference Jacobian determinant of `F` in the coordinates
/// `(s, y = -cos φ)`. Equals 1 for an area-preserving map.
pub fn symplectic_check(curve: &Curve, x: PhasePoint, h: f64) -> Result<f64, BilliardError> {
    if !(x.phi > 10.0 * h && x.phi < PI - 10.0 * h) {
        return Err(BilliardError::InvalidPhase { phi: x.phi });
    }
    let y = -x.phi.cos();
    let l = curve.length();
    let map = |s: f64, y: f64| -> Result<(f64, f64), BilliardError> {
        let next = next_collision(curve, PhasePoint::new(s.rem_euclid(l), (-y).acos()))?;
        Ok((next.s, -next.phi.cos()))
    };
    let unwrap = |d: f64| d - l * (d / l).round();
    let (sp, yp) = map(x.s + h, y)?;
    let (sm, ym) = map(x.s - h, y)?;
    let (sq, yq) = map(x.s, y + h)?;
    let (sr, yr) = map(x.s, y - h)?;
    let ds_ds = unwrap(sp - sm) / (2.0 * h);
    let dy_ds = (yp - ym) / (2.0 * h);
    let ds_dy = unwrap(sq - sr) / (2.0 * h);
    let dy_dy = (yq - yr) / (2.0 * h);
    Ok(ds_ds * dy_dy - ds_dy * dy_ds)
}

/// Orbit dump with columns `index,s,phi,x,y`.
pub fn orbit_csv(curve: &Curve, orbit: &[PhasePoint]) -> String {
    let mut out = String::from("index,s,phi,x,y\n");
    for (i, p) in orbit.iter().enumerate() {
        let (pos, _, _) = curve.geometry_at(p.s);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            i,
            crate::fmt17(p.s),
            crate::fmt17(p.phi),
            crate::fmt17(pos.x),
            crate::fmt17(pos.y)
        );
    }
    out
}
