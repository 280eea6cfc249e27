use super::InsecurityError;
use crate::curve::Curve;
use crate::lazutkin::{hamiltonian_profile, relative_spread, shift_consistency, ShiftReport, SigmaMap};
use crate::trajectory::{solve_min_polyline, SolveOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Deviations below this are treated as exact (solver and quadrature noise).
pub const NOISE_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub n: usize,
    /// `max_m |σ(P_m) − m/n|`.
    pub d_n: f64,
    pub n2_dn: f64,
    /// Vertex index attaining `d_n`.
    pub argmax_m: usize,
    pub phi_max: f64,
    /// `max H_norm / min H_norm − 1` along the trajectory.
    pub h_spread: f64,
    pub shift: Option<ShiftReport>,
    /// Set when the solve for this row failed; such rows are excluded from
    /// the fits.
    pub error: Option<String>,
}

impl DeviationRow {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub rows: Vec<DeviationRow>,
    /// Least-squares slope of `log D_n` against `log n`; `None` when fewer
    /// than two rows sit above [`NOISE_FLOOR`].
    pub slope: Option<f64>,
    pub phi_slope: Option<f64>,
    /// Empirical surrogate for the equidistribution constant:
    /// `max n² D_n` over the successful rows.
    pub c_hat: f64,
    pub degenerate: bool,
    pub note: Option<String>,
}

impl DeviationTable {
    /// Columns `n,D_n,n2Dn,phi_max,H_spread`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,D_n,n2Dn,phi_max,H_spread\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                crate::fmt17(r.d_n),
                crate::fmt17(r.n2_dn),
                crate::fmt17(r.phi_max),
                crate::fmt17(r.h_spread)
            );
        }
        out
    }

    pub fn row(&self, n: usize) -> Option<&DeviationRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Ordinary least squares slope of `ln y` on `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn scan_row(curve: &Curve, sm: &SigmaMap, n: usize, opts: SolveOptions) -> DeviationRow {
    match solve_min_polyline(curve, sm, n, opts) {
        Ok(traj) => {
            let (argmax_m, d_n) = traj
                .vertex_sigma
                .iter()
                .enumerate()
                .map(|(m, s)| (m, (s - m as f64 / n as f64).abs()))
                .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let h = hamiltonian_profile(sm, &traj);
            DeviationRow {
                n,
                d_n,
                n2_dn: (n * n) as f64 * d_n,
                argmax_m,
                phi_max: traj.phi_max(),
                h_spread: relative_spread(&h),
                shift: Some(shift_consistency(sm, &traj)),
                error: None,
            }
        }
        Err(e) => DeviationRow {
            n,
            d_n: f64::NAN,
            n2_dn: f64::NAN,
            argmax_m: 0,
            phi_max: f64::NAN,
            h_spread: f64::NAN,
            shift: None,
            error: Some(e.to_string()),
        },
    }
}

/// Solves `T_n` for every `n` in `n_list` and measures how far its vertices
/// are from the σ-equipartition.
///
/// Rows are solved in parallel on the current rayon pool; the table is
/// ordered as `n_list` regardless.
pub fn equidistribution_scan(
    curve: &Curve,
    sm: &SigmaMap,
    n_list: &[usize],
    opts: SolveOptions,
) -> Result<DeviationTable, InsecurityError> {
    if n_list.is_empty() {
        return Err(InsecurityError::InvalidScan("empty n_list".into()));
    }
    if n_list.iter().any(|&n| n < 4) {
        return Err(InsecurityError::InvalidScan("every n must be ≥ 4".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(InsecurityError::InvalidScan("n_list must be strictly increasing".into()));
    }
    let rows: Vec<DeviationRow> = n_list.par_iter().map(|&n| scan_row(curve, sm, n, opts)).collect();
    for r in rows.iter().filter(|r| !r.ok()) {
        log::warn!("scan row n = {} failed: {}", r.n, r.error.as_deref().unwrap_or(""));
    }
    let good: Vec<&DeviationRow> = rows.iter().filter(|r| r.ok()).collect();
    let above: Vec<(f64, f64)> = good.iter().filter(|r| r.d_n > NOISE_FLOOR).map(|r| (r.n as f64, r.d_n)).collect();
    let slope = fit_loglog_slope(&above);
    let phis: Vec<(f64, f64)> = good.iter().map(|r| (r.n as f64, r.phi_max)).collect();
    let phi_slope = fit_loglog_slope(&phis);
    let c_hat = good.iter().map(|r| r.n2_dn).fold(0.0, f64::max);
    let degenerate = slope.is_none();
    Ok(DeviationTable {
        rows,
        slope,
        phi_slope,
        c_hat,
        degenerate,
        note: degenerate.then(|| "degenerate: at noise floor".to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0].iter().map(|&n: &f64| (n, 3.0 * n.powi(-2))).collect();
        assert!((fit_loglog_slope(&pts).unwrap() + 2.0).abs() < 1e-12);
        assert!(fit_loglog_slope(&pts[..1]).is_none());
    }
}
