use super::InsecurityError;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Denominators searched by the irrationality screen.
const SCREEN_MAX_DENOMINATOR: i64 = 1_000_000;
/// A declared irrational this close to a small-denominator fraction is
/// almost certainly that fraction after rounding.
const SCREEN_TOL: f64 = 1e-15;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// A blocker on the arc, in σ coordinates. Rationality is declared by the
/// caller, never inferred from a float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryBlocker {
    Rational(i64, i64),
    Irrational(f64),
}

impl BoundaryBlocker {
    pub fn value(&self) -> f64 {
        match *self {
            BoundaryBlocker::Rational(p, q) => p as f64 / q as f64,
            BoundaryBlocker::Irrational(v) => v,
        }
    }

    fn normalized(self, index: usize) -> Result<Self, InsecurityError> {
        let bad = |reason: String| InsecurityError::InvalidBlocker { index, reason };
        match self {
            BoundaryBlocker::Rational(p, q) => {
                if q == 0 {
                    return Err(bad("zero denominator".into()));
                }
                let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
                if p <= 0 || p >= q {
                    return Err(bad(format!("{p}/{q} not in (0, 1)")));
                }
                let g = gcd(p as u64, q as u64) as i64;
                Ok(BoundaryBlocker::Rational(p / g, q / g))
            }
            BoundaryBlocker::Irrational(v) => {
                if !(v > 0.0 && v < 1.0) {
                    return Err(bad(format!("{v} not in (0, 1)")));
                }
                if let Some((p, q)) = near_fraction(v) {
                    return Err(bad(format!("{v} is within {SCREEN_TOL:e} of {p}/{q}; declare it rational")));
                }
                Ok(self)
            }
        }
    }
}

fn near_fraction(v: f64) -> Option<(i64, i64)> {
    (1..=SCREEN_MAX_DENOMINATOR).find_map(|q| {
        let p = (v * q as f64).round();
        ((v - p / q as f64).abs() < SCREEN_TOL).then_some((p as i64, q))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockerSet {
    pub boundary: Vec<BoundaryBlocker>,
    #[serde(default)]
    pub interior: Vec<[f64; 2]>,
}

impl BlockerSet {
    /// Validates and reduces every entry; the returned set has rationals in
    /// lowest terms.
    pub fn new(boundary: Vec<BoundaryBlocker>, interior: Vec<[f64; 2]>) -> Result<Self, InsecurityError> {
        let boundary = boundary.into_iter().enumerate().map(|(i, b)| b.normalized(i)).collect::<Result<Vec<_>, _>>()?;
        Ok(BlockerSet { boundary, interior })
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn validated(self) -> Result<Self, InsecurityError> {
        BlockerSet::new(self.boundary, self.interior)
    }

    pub fn interior_points(&self) -> Vec<Vec2> {
        self.interior.iter().map(|p| Vec2::new(p[0], p[1])).collect()
    }

    pub fn rational_denominators(&self) -> Vec<u64> {
        self.boundary
            .iter()
            .filter_map(|b| match b {
                BoundaryBlocker::Rational(_, q) => Some(*q as u64),
                _ => None,
            })
            .collect()
    }
}

/// Candidate segment counts `n_i = 1 + (N + i)·Q`, `i = 0..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuliPlan {
    /// Product of the reduced rational denominators (1 if none).
    #[serde(rename = "Q")]
    pub q_product: u64,
    /// Number of boundary blockers.
    pub k: usize,
    pub denominators: Vec<u64>,
}

impl ModuliPlan {
    pub fn candidates(&self, big_n: u64) -> Result<Vec<u64>, InsecurityError> {
        (0..=self.k as u64)
            .map(|i| {
                big_n
                    .checked_add(i)
                    .and_then(|m| m.checked_mul(self.q_product))
                    .and_then(|m| m.checked_add(1))
                    .ok_or(InsecurityError::Overflow { what: "candidate n_i" })
            })
            .collect()
    }

    /// Whether every candidate for `big_n` is coprime to every rational
    /// denominator.
    pub fn coprime(&self, big_n: u64) -> Result<bool, InsecurityError> {
        Ok(self.candidates(big_n)?.iter().all(|&n| self.denominators.iter().all(|&q| gcd(n, q) == 1)))
    }
}

pub fn build_moduli(blockers: &BlockerSet) -> Result<ModuliPlan, InsecurityError> {
    let denominators = blockers.rational_denominators();
    let q_product = denominators
        .iter()
        .try_fold(1u64, |acc, &q| acc.checked_mul(q))
        .ok_or(InsecurityError::Overflow { what: "denominator product Q" })?;
    Ok(ModuliPlan { q_product, k: blockers.boundary.len(), denominators })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaWitness {
    pub blocker_index: usize,
    pub blocker_value: f64,
    pub numerator: u64,
    pub denominator: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    /// Distance from the irrational blockers to the fractions `m/(jQ)`,
    /// `j = 1..=k`; `+∞` without irrational blockers.
    #[serde(with = "super::inf_as_null")]
    pub delta: f64,
    pub witness: Option<DeltaWitness>,
}

pub fn compute_delta(blockers: &BlockerSet, plan: &ModuliPlan) -> Result<DeltaReport, InsecurityError> {
    let mut report = DeltaReport { delta: f64::INFINITY, witness: None };
    for (index, b) in blockers.boundary.iter().enumerate() {
        let BoundaryBlocker::Irrational(t) = *b else { continue };
        for j in 1..=plan.k as u64 {
            let d =
                j.checked_mul(plan.q_product).ok_or(InsecurityError::Overflow { what: "fraction denominator jQ" })?;
            if d < 2 {
                continue;
            }
            let m = ((t * d as f64).round() as u64).clamp(1, d - 1);
            let dist = (t - m as f64 / d as f64).abs();
            if dist < report.delta {
                let g = gcd(m, d);
                report = DeltaReport {
                    delta: dist,
                    witness: Some(DeltaWitness {
                        blocker_index: index,
                        blocker_value: t,
                        numerator: m / g,
                        denominator: d / g,
                    }),
                };
            }
        }
    }
    Ok(report)
}

/// The two competing bounds on `|m_1 n_j − m_2 n_i|` and the first `N`
/// at which the lower one exceeds the upper one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// `δ Q² N / 2`.
    pub lower: f64,
    /// `3 Ĉ`, with `Ĉ` the empirical equidistribution constant.
    pub upper: f64,
    pub n_threshold: u64,
}

pub fn collision_bounds_check(delta: f64, q: u64, big_n: u64, c_hat: f64) -> Result<BoundsReport, InsecurityError> {
    if !delta.is_finite() {
        return Err(InsecurityError::InfiniteDelta);
    }
    let q2 = (q as f64) * (q as f64);
    let ratio = 6.0 * c_hat / (delta * q2);
    Ok(BoundsReport {
        lower: delta * q2 * big_n as f64 / 2.0,
        upper: 3.0 * c_hat,
        n_threshold: ratio.floor() as u64 + 1,
    })
}
