//! Smooth strictly convex closed curves used as billiard table boundaries.
//!
//! Every curve is parametrized counterclockwise by a raw parameter
//! `t ∈ [0, 2π)`. An arc-length table built at construction converts between
//! `t` and the arc length `s`, with `s = 0` at `t = 0`.

use crate::quadrature::{cumulative_table, gauss_legendre, locate_panel, safeguarded_newton};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

/// Number of base panels in the arc-length table and samples in the
/// convexity check.
pub const TABLE_PANELS: usize = 4096;
const TABLE_TOL: f64 = 1e-12;
const DIAMETER_SAMPLES: usize = 720;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("invalid curve spec: {0}")]
    InvalidSpec(String),
    #[error("curve is not strictly convex: curvature {curvature:e} at t = {t}")]
    NonConvex { t: f64, curvature: f64 },
    #[error("invalid arc: {0}")]
    InvalidArc(String),
    #[error("value {value} outside [0, 1]")]
    OutOfRange { value: f64 },
}

/// One cosine/sine term `(index, cos amplitude, sin amplitude)` of a radial
/// perturbation.
pub type Harmonic = (u32, f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Polar curve `r(t) = r0 + Σ (c_j cos jt + d_j sin jt)`.
    FourierCircle {
        r0: f64,
        harmonics: Vec<Harmonic>,
    },
}

impl CurveSpec {
    pub fn validate(&self) -> Result<(), CurveError> {
        let bad = |msg: &str| Err(CurveError::InvalidSpec(msg.to_string()));
        match self {
            CurveSpec::Circle { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad("radius > 0 required");
                }
            }
            CurveSpec::Ellipse { a, b } => {
                if !(a.is_finite() && b.is_finite() && *b > 0.0) {
                    return bad("b > 0 required");
                }
                if a < b {
                    return bad("a ≥ b required");
                }
            }
            CurveSpec::FourierCircle { r0, harmonics } => {
                if !(r0.is_finite() && *r0 > 0.0) {
                    return bad("r0 > 0 required");
                }
                for &(j, c, d) in harmonics {
                    if j < 2 {
                        return bad("harmonic index ≥ 2 required");
                    }
                    if !(c.is_finite() && d.is_finite()) {
                        return bad("harmonic amplitudes must be finite");
                    }
                }
            }
        }
        Ok(())
    }

    /// Position and first two derivatives with respect to `t`.
    fn jet(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        let (sin, cos) = t.sin_cos();
        match self {
            CurveSpec::Circle { radius: r } => {
                (Vec2::new(r * cos, r * sin), Vec2::new(-r * sin, r * cos), Vec2::new(-r * cos, -r * sin))
            }
            CurveSpec::Ellipse { a, b } => {
                (Vec2::new(a * cos, b * sin), Vec2::new(-a * sin, b * cos), Vec2::new(-a * cos, -b * sin))
            }
            CurveSpec::FourierCircle { r0, harmonics } => {
                let (r, dr, ddr) = radial_jet(*r0, harmonics, t);
                (
                    Vec2::new(r * cos, r * sin),
                    Vec2::new(dr * cos - r * sin, dr * sin + r * cos),
                    Vec2::new(ddr * cos - 2.0 * dr * sin - r * cos, ddr * sin + 2.0 * dr * cos - r * sin),
                )
            }
        }
    }
}

fn radial_jet(r0: f64, harmonics: &[Harmonic], t: f64) -> (f64, f64, f64) {
    let mut r = r0;
    let mut dr = 0.0;
    let mut ddr = 0.0;
    for &(j, c, d) in harmonics {
        let j = j as f64;
        let (s, co) = (j * t).sin_cos();
        r += c * co + d * s;
        dr += j * (d * co - c * s);
        ddr -= j * j * (c * co + d * s);
    }
    (r, dr, ddr)
}

/// Local differential geometry at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub point: Vec2,
    /// Unit tangent in the counterclockwise direction.
    pub tangent: Vec2,
    /// Unit inward normal (tangent rotated by +90°).
    pub normal: Vec2,
    pub curvature: f64,
}

#[derive(Debug, Clone)]
pub struct Curve {
    spec: CurveSpec,
    length: f64,
    /// Cumulative arc length at `t_j = j·2π/TABLE_PANELS`.
    s_table: Vec<f64>,
    diameter: f64,
}

/// Builds a validated [`Curve`] from its spec.
pub fn make_curve(spec: CurveSpec) -> Result<Curve, CurveError> {
    Curve::new(spec)
}

impl Curve {
    pub fn new(spec: CurveSpec) -> Result<Self, CurveError> {
        spec.validate()?;
        let h = TAU / TABLE_PANELS as f64;
        for j in 0..TABLE_PANELS {
            let t = h * j as f64;
            let k = curvature_of(&spec, t);
            let radial_ok = match &spec {
                CurveSpec::FourierCircle { r0, harmonics } => radial_jet(*r0, harmonics, t).0 > 0.0,
                _ => true,
            };
            if !(k > 0.0 && k.is_finite()) || !radial_ok {
                return Err(CurveError::NonConvex { t, curvature: k });
            }
        }
        let speed = |t: f64| spec.jet(t).1.hypot();
        let s_table = cumulative_table(&speed, 0.0, TAU, TABLE_PANELS, TABLE_TOL);
        let length = s_table[TABLE_PANELS];

        let samples: Vec<Vec2> =
            (0..DIAMETER_SAMPLES).map(|i| spec.jet(TAU * i as f64 / DIAMETER_SAMPLES as f64).0).collect();
        let mut diameter: f64 = 0.0;
        for (i, p) in samples.iter().enumerate() {
            for q in &samples[i + 1..] {
                diameter = diameter.max(p.distance(*q));
            }
        }
        Ok(Curve { spec, length, s_table, diameter })
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    /// Total arc length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Largest distance between two boundary samples.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn position_t(&self, t: f64) -> Vec2 {
        self.spec.jet(t).0
    }

    pub fn derivative_t(&self, t: f64) -> Vec2 {
        self.spec.jet(t).1
    }

    pub fn speed_t(&self, t: f64) -> f64 {
        self.spec.jet(t).1.hypot()
    }

    pub fn curvature_t(&self, t: f64) -> f64 {
        curvature_of(&self.spec, t)
    }

    pub fn frame_t(&self, t: f64) -> Frame {
        let (p, d1, d2) = self.spec.jet(t);
        let speed = d1.hypot();
        let tangent = d1 * (1.0 / speed);
        Frame { t, point: p, tangent, normal: tangent.perp(), curvature: d1.cross(d2) / (speed * speed * speed) }
    }

    /// Arc length at raw parameter `t`; unbounded `t` counts full turns.
    pub fn s_of_t(&self, t: f64) -> f64 {
        let turns = (t / TAU).floor();
        let local = t - turns * TAU;
        turns * self.length + self.s_of_t_local(local)
    }

    fn s_of_t_local(&self, t: f64) -> f64 {
        let h = TAU / TABLE_PANELS as f64;
        let j = ((t / h).floor() as usize).min(TABLE_PANELS - 1);
        let tj = h * j as f64;
        self.s_table[j] + gauss_legendre(|x| self.speed_t(x), tj, t)
    }

    /// Raw parameter in `[0, 2π)` at arc length `s` (taken modulo `L`).
    pub fn t_of_s(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.length);
        let h = TAU / TABLE_PANELS as f64;
        let j = locate_panel(&self.s_table, s);
        let (t0, t1) = (h * j as f64, h * (j + 1) as f64);
        let (s0, s1) = (self.s_table[j], self.s_table[j + 1]);
        // Cubic Hermite guess of t(s) with end slopes dt/ds = 1/speed.
        let ds = s1 - s0;
        let u = ((s - s0) / ds).clamp(0.0, 1.0);
        let m0 = ds / self.speed_t(t0);
        let m1 = ds / self.speed_t(t1);
        let (u2, u3) = (u * u, u * u * u);
        let guess =
            (2.0 * u3 - 3.0 * u2 + 1.0) * t0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * t1 + (u3 - u2) * m1;
        let t = safeguarded_newton(
            |x| self.s_table[j] + gauss_legendre(|y| self.speed_t(y), t0, x) - s,
            |x| self.speed_t(x),
            t0,
            t1,
            guess,
            1e-16,
        );
        if t >= TAU {
            0.0
        } else {
            t
        }
    }

    /// Position, unit tangent and curvature at arc length `s` (mod `L`).
    pub fn geometry_at(&self, s: f64) -> (Vec2, Vec2, f64) {
        let f = self.frame(s);
        (f.point, f.tangent, f.curvature)
    }

    pub fn frame(&self, s: f64) -> Frame {
        self.frame_t(self.t_of_s(s))
    }

    /// `γ(t + dt) − γ(t)` integrated from the derivative, which avoids the
    /// cancellation of subtracting two nearby positions.
    pub fn chord_t(&self, t: f64, dt: f64) -> Vec2 {
        let pieces = ((dt.abs() / 0.05).ceil() as usize).max(1);
        let h = dt / pieces as f64;
        let mut acc = Vec2::default();
        for j in 0..pieces {
            let (a, b) = (t + h * j as f64, t + h * (j + 1) as f64);
            acc = acc
                + Vec2::new(
                    gauss_legendre(|x| self.derivative_t(x).x, a, b),
                    gauss_legendre(|x| self.derivative_t(x).y, a, b),
                );
        }
        acc
    }

    /// Whether `p` lies strictly inside the table.
    pub fn contains(&self, p: Vec2) -> bool {
        match &self.spec {
            CurveSpec::Circle { radius } => p.hypot() < *radius,
            CurveSpec::Ellipse { a, b } => (p.x / a).powi(2) + (p.y / b).powi(2) < 1.0,
            CurveSpec::FourierCircle { r0, harmonics } => {
                let theta = p.y.atan2(p.x);
                p.hypot() < radial_jet(*r0, harmonics, theta).0
            }
        }
    }
}

fn curvature_of(spec: &CurveSpec, t: f64) -> f64 {
    let (_, d1, d2) = spec.jet(t);
    let speed = d1.hypot();
    d1.cross(d2) / (speed * speed * speed)
}

/// A boundary arc `[s_A, s_B]` in arc length, without wraparound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    #[serde(rename = "s_A")]
    pub s_a: f64,
    #[serde(rename = "s_B")]
    pub s_b: f64,
}

impl ArcSpec {
    pub fn new(curve: &Curve, s_a: f64, s_b: f64) -> Result<Self, CurveError> {
        let arc = ArcSpec { s_a, s_b };
        arc.validate(curve)?;
        Ok(arc)
    }

    /// The arc from raw parameter `0` to `π/2`; on an ellipse this runs
    /// from `(a, 0)` to `(0, b)`.
    pub fn quarter(curve: &Curve) -> Self {
        ArcSpec { s_a: 0.0, s_b: curve.s_of_t(FRAC_PI_2) }
    }

    pub fn validate(&self, curve: &Curve) -> Result<(), CurveError> {
        let len = self.s_b - self.s_a;
        if !(self.s_a.is_finite() && self.s_b.is_finite()) {
            return Err(CurveError::InvalidArc("endpoints must be finite".into()));
        }
        if !(len > 0.0 && len < curve.length()) {
            return Err(CurveError::InvalidArc(format!(
                "0 < s_B - s_A < L required (got {len}, L = {})",
                curve.length()
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.s_b - self.s_a
    }
}

/// Affine chart `u ∈ [0, 1] ↦ s` on an arc.
pub fn arc_coordinates(arc: &ArcSpec, u: f64) -> Result<f64, CurveError> {
    if !(0.0..=1.0).contains(&u) {
        return Err(CurveError::OutOfRange { value: u });
    }
    Ok(arc.s_a + u * (arc.s_b - arc.s_a))
}

/// Inverse of [`arc_coordinates`].
pub fn arc_parameter(arc: &ArcSpec, s: f64) -> Result<f64, CurveError> {
    let u = (s - arc.s_a) / (arc.s_b - arc.s_a);
    if !(0.0..=1.0).contains(&u) {
        return Err(CurveError::OutOfRange { value: u });
    }
    Ok(u)
}
