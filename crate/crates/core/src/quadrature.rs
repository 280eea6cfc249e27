//! Numerical integration and root polishing helpers.

/// 8-point Gauss-Legendre nodes on [-1, 1] (positive half).
const GL8_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Fixed 8-point Gauss-Legendre rule on `[a, b]`.
///
/// Used for short intervals inside an already-tabulated panel where the
/// integrand is smooth and the rule is exact to rounding.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

const MAX_DEPTH: u32 = 40;

/// Adaptive Simpson quadrature with Richardson correction.
///
/// `tol` is an absolute error target for the whole interval; it is split in
/// half on each bisection.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Cumulative integral table over `panels` equal panels of `[a, b]`.
///
/// Returns `panels + 1` values starting at zero. Each panel is integrated
/// with [`adaptive_simpson`] to `tol / panels` (floored at 1e-16).
pub fn cumulative_table<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, tol: f64) -> Vec<f64> {
    let h = (b - a) / panels as f64;
    let panel_tol = (tol / panels as f64).max(1e-16);
    let mut out = Vec::with_capacity(panels + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 0..panels {
        let lo = a + h * j as f64;
        let hi = if j + 1 == panels { b } else { a + h * (j + 1) as f64 };
        acc += adaptive_simpson(f, lo, hi, panel_tol);
        out.push(acc);
    }
    out
}

/// Index `j` of the panel with `table[j] <= value < table[j + 1]`, clamped
/// to the valid panel range. `table` must be nondecreasing.
pub fn locate_panel(table: &[f64], value: f64) -> usize {
    let last = table.len() - 2;
    match table.binary_search_by(|probe| probe.partial_cmp(&value).unwrap()) {
        Ok(j) => j.min(last),
        Err(0) => 0,
        Err(j) => (j - 1).min(last),
    }
}

/// Inverts a monotone increasing function on a bracket.
///
/// Starts from `guess`, takes Newton steps using `deriv`, and falls back
/// to bisection whenever a step leaves `[lo, hi]`.
pub fn safeguarded_newton<F, D>(f: F, deriv: D, mut lo: f64, mut hi: f64, guess: f64, xtol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = guess.clamp(lo, hi);
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = deriv(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= xtol || hi - lo <= xtol {
            break;
        }
    }
    x
}
