//! The σ reparametrization `dσ = ½ k^{2/3} ds` of an arc and the leading
//! term of the interpolating Hamiltonian.
//!
//! σ is normalized to `[0, 1]` by dividing by the total mass `S_tot`;
//! correspondingly the Hamiltonian is reported as `k^{-2/3} φ² / S_tot²`, so
//! that one step of a near-grazing orbit advances σ by about `sqrt(H_norm)`.

use crate::billiard::PhasePoint;
use crate::curve::{ArcSpec, Curve, CurveError};
use crate::quadrature::{cumulative_table, gauss_legendre, locate_panel, safeguarded_newton};
use crate::trajectory::Trajectory;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const SIGMA_PANELS: usize = 4096;
const SIGMA_TOL: f64 = 1e-12;

/// Normalized σ coordinate on an arc, with its inverse.
#[derive(Debug, Clone)]
pub struct SigmaMap {
    curve: Curve,
    arc: ArcSpec,
    t_a: f64,
    t_b: f64,
    /// Unnormalized cumulative mass at equally spaced raw parameters.
    table: Vec<f64>,
    total_mass: f64,
}

/// Tabulates σ on `arc`.
pub fn build_sigma(curve: &Curve, arc: ArcSpec) -> Result<SigmaMap, CurveError> {
    arc.validate(curve)?;
    let t_a = curve.t_of_s(arc.s_a);
    let t_end = curve.t_of_s(arc.s_b);
    let mut t_b = t_a + (t_end - t_a).rem_euclid(TAU);
    if t_b <= t_a {
        t_b += TAU;
    }
    let density = |t: f64| 0.5 * curve.curvature_t(t).powf(2.0 / 3.0) * curve.speed_t(t);
    let table = cumulative_table(&density, t_a, t_b, SIGMA_PANELS, SIGMA_TOL);
    let total_mass = table[SIGMA_PANELS];
    Ok(SigmaMap { curve: curve.clone(), arc, t_a, t_b, table, total_mass })
}

impl SigmaMap {
    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn arc(&self) -> &ArcSpec {
        &self.arc
    }

    /// `S_tot = ∫ ½ k^{2/3} ds` over the arc.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    fn density_t(&self, t: f64) -> f64 {
        0.5 * self.curve.curvature_t(t).powf(2.0 / 3.0) * self.curve.speed_t(t)
    }

    fn panel_width(&self) -> f64 {
        (self.t_b - self.t_a) / SIGMA_PANELS as f64
    }

    fn mass_t(&self, t: f64) -> f64 {
        let h = self.panel_width();
        let j = (((t - self.t_a) / h).floor().max(0.0) as usize).min(SIGMA_PANELS - 1);
        let tj = self.t_a + h * j as f64;
        self.table[j] + gauss_legendre(|x| self.density_t(x), tj, t)
    }

    /// Raw parameter of arc length `s`, continuous across the arc.
    fn t_on_arc(&self, s: f64) -> f64 {
        let span = self.t_b - self.t_a;
        let mut dt = (self.curve.t_of_s(s) - self.t_a).rem_euclid(TAU);
        if dt > span + 0.5 * (TAU - span) {
            dt -= TAU;
        }
        self.t_a + dt.clamp(0.0, span)
    }

    /// Normalized σ at arc length `s ∈ [s_A, s_B]`, clamped to `[0, 1]`.
    pub fn sigma(&self, s: f64) -> f64 {
        if s <= self.arc.s_a {
            return 0.0;
        }
        if s >= self.arc.s_b {
            return 1.0;
        }
        (self.mass_t(self.t_on_arc(s)) / self.total_mass).clamp(0.0, 1.0)
    }

    /// Arc length with normalized σ value `sigma ∈ [0, 1]`.
    pub fn s_of_sigma(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return self.arc.s_a;
        }
        if sigma >= 1.0 {
            return self.arc.s_b;
        }
        let target = sigma * self.total_mass;
        let h = self.panel_width();
        let j = locate_panel(&self.table, target);
        let (t0, t1) = (self.t_a + h * j as f64, self.t_a + h * (j + 1) as f64);
        let frac = (target - self.table[j]) / (self.table[j + 1] - self.table[j]);
        let t = safeguarded_newton(
            |x| self.table[j] + gauss_legendre(|y| self.density_t(y), t0, x) - target,
            |x| self.density_t(x),
            t0,
            t1,
            t0 + frac * h,
            1e-16,
        );
        let s = self.arc.s_a + (self.curve.s_of_t(t) - self.curve.s_of_t(self.t_a));
        s.clamp(self.arc.s_a, self.arc.s_b)
    }
}

/// The `n + 1` arc lengths `Q_m` with `σ(Q_m) = m/n`.
pub fn equipartition_points(sm: &SigmaMap, n: usize) -> Vec<f64> {
    assert!(n >= 1, "equipartition needs at least one segment");
    (0..=n)
        .map(|m| match m {
            0 => sm.arc.s_a,
            m if m == n => sm.arc.s_b,
            m => sm.s_of_sigma(m as f64 / n as f64),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSample {
    pub h_norm: f64,
    pub phi: f64,
}

/// Leading-order interpolating Hamiltonian `k^{-2/3} φ² / S_tot²`.
pub fn hamiltonian_at(sm: &SigmaMap, x: PhasePoint) -> HamiltonianSample {
    let (_, _, k) = sm.curve.geometry_at(x.s);
    HamiltonianSample { h_norm: leading_hamiltonian(k, x.phi, sm.total_mass), phi: x.phi }
}

pub(crate) fn leading_hamiltonian(curvature: f64, phi: f64, total_mass: f64) -> f64 {
    curvature.powf(-2.0 / 3.0) * phi * phi / (total_mass * total_mass)
}

/// How closely a trajectory follows the rigid σ-shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub n: usize,
    /// `max_m |Δσ_m − 1/n|`.
    pub max_dsigma_dev: f64,
    /// `max_m |Δσ_m − sqrt(mean H_norm)|`.
    #[serde(rename = "max_sqrtH_dev")]
    pub max_sqrt_h_dev: f64,
    /// `max H_norm / min H_norm − 1` over the vertices.
    #[serde(rename = "H_spread_rel")]
    pub h_spread_rel: f64,
}

/// Per-vertex `H_norm` along a trajectory (outgoing angle at each vertex,
/// reflected incoming angle at the last one).
pub fn hamiltonian_profile(sm: &SigmaMap, traj: &Trajectory) -> Vec<f64> {
    traj.vertex_s
        .iter()
        .zip(&traj.phi_list)
        .map(|(&s, &phi)| hamiltonian_at(sm, PhasePoint::new(s, phi)).h_norm)
        .collect()
}

/// Relative spread `max/min − 1`.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min - 1.0
}

pub fn shift_consistency(sm: &SigmaMap, traj: &Trajectory) -> ShiftReport {
    let n = traj.n;
    let sigma: Vec<f64> = traj.vertex_s.iter().map(|&s| sm.sigma(s)).collect();
    let h = hamiltonian_profile(sm, traj);
    let mean_h = h.iter().sum::<f64>() / h.len() as f64;
    let shift = mean_h.sqrt();
    let mut max_dsigma_dev: f64 = 0.0;
    let mut max_sqrt_h_dev: f64 = 0.0;
    for w in sigma.windows(2) {
        let d = w[1] - w[0];
        max_dsigma_dev = max_dsigma_dev.max((d - 1.0 / n as f64).abs());
        max_sqrt_h_dev = max_sqrt_h_dev.max((d - shift).abs());
    }
    ShiftReport { n, max_dsigma_dev, max_sqrt_h_dev, h_spread_rel: relative_spread(&h) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_curve, CurveSpec};

    fn unit_arc() -> SigmaMap {
        let c = make_curve(CurveSpec::Circle { radius: 1.0 }).unwrap();
        build_sigma(&c, ArcSpec { s_a: 0.0, s_b: 1.0 }).unwrap()
    }

    fn ellipse_quarter() -> SigmaMap {
        let c = make_curve(CurveSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let arc = ArcSpec::quarter(&c);
        build_sigma(&c, arc).unwrap()
    }

    #[test]
    fn circle_sigma_is_affine() {
        let sm = unit_arc();
        assert!((sm.total_mass() - 0.5).abs() < 1e-13);
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            assert!((sm.sigma(s) - s).abs() < 1e-12);
            assert!((sm.s_of_sigma(s) - s).abs() < 1e-12);
        }
        let c = make_curve(CurveSpec::Circle { radius: 3.0 }).unwrap();
        let sm = build_sigma(&c, ArcSpec { s_a: 2.0, s_b: 4.5 }).unwrap();
        assert!((sm.total_mass() - 0.5 * 3f64.powf(-2.0 / 3.0) * 2.5).abs() < 1e-13);
    }

    #[test]
    fn arcs_across_the_origin() {
        let c = make_curve(CurveSpec::Circle { radius: 1.0 }).unwrap();
        let sm = build_sigma(&c, ArcSpec { s_a: 6.0, s_b: 7.0 }).unwrap();
        assert!((sm.total_mass() - 0.5).abs() < 1e-12);
        assert!((sm.sigma(6.5) - 0.5).abs() < 1e-12);
        assert!((sm.s_of_sigma(0.75) - 6.75).abs() < 1e-12);
    }

    #[test]
    fn equipartition_on_circle() {
        let q = equipartition_points(&unit_arc(), 4);
        for (m, s) in q.iter().enumerate() {
            assert!((s - 0.25 * m as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_basics() {
        let sm = unit_arc();
        let h = hamiltonian_at(&sm, PhasePoint::new(0.5, 0.1));
        assert!((h.h_norm - 0.04).abs() < 1e-13);
        assert_eq!(hamiltonian_at(&sm, PhasePoint::new(0.5, 0.0)).h_norm, 0.0);
    }

    #[test]
    fn ellipse_hamiltonian_at_vertex() {
        let sm = ellipse_quarter();
        let h = hamiltonian_at(&sm, PhasePoint::new(0.0, 0.1));
        // 2^{-2/3}·0.01/S_tot² with S_tot pinned by high-precision quadrature
        assert!((h.h_norm - 0.008_601_115_189_194_28).abs() < 1e-13);
    }

    #[test]
    fn ellipse_round_trip() {
        let sm = ellipse_quarter();
        let len = sm.arc().length();
        for i in 0..=200 {
            let s = len * i as f64 / 200.0;
            assert!((sm.s_of_sigma(sm.sigma(s)) - s).abs() < 1e-10 * len);
        }
        let mut prev = -1.0;
        for i in 0..=500 {
            let v = sm.sigma(len * i as f64 / 500.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn spread_is_relative() {
        assert!((relative_spread(&[1.0, 2.0, 1.5]) - 1.0).abs() < 1e-15);
    }
}
