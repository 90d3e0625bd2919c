use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::critical::{critical_points, CriticalPoint};
use super::ComplexError;
use crate::num::Real;
use crate::polycore::{FactoredPolynomial, MapFamily};

/// Distance within which an orbit counts as having returned.
pub const RETURN_TOLERANCE: f64 = 1e-8;
/// Multiplier moduli below this count as attracting.
pub const MULTIPLIER_MARGIN: f64 = 0.999;
pub const DEFAULT_MAX_PERIOD: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "fate")]
pub enum OrbitFate<T> {
    /// First step with `|z_k| > K`.
    AttractedToInfinity { step: usize },
    AttractedToCycle { period: usize, multiplier: T, point: Complex<T> },
    Undecided { budget: usize },
}

impl<T> OrbitFate<T> {
    pub fn is_resolved(&self) -> bool {
        !matches!(self, OrbitFate::Undecided { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexThreshold<T> {
    pub a_min: T,
    /// Escape radius used for `|a| ≥ 1`.
    pub k: T,
    /// `E1` is empty and `a_min = 1` by convention.
    pub e1_empty: bool,
    /// The critical point of `E1` attaining the maximum.
    pub extremal: Option<Complex<T>>,
}

/// Smallest `|a| ≥ 1` beyond which every critical value `a·g(z)`, `z ∈ E1`,
/// lies outside the escape disk.
pub fn complex_threshold<T: Real>(g: &FactoredPolynomial<T>) -> Result<ComplexThreshold<T>, ComplexError> {
    let k = g.cauchy_escape_radius(T::one())?;
    let e = critical_points(g)?;
    let mut out = ComplexThreshold { a_min: T::one(), k, e1_empty: e.e1.is_empty(), extremal: None };
    for c in &e.e1 {
        let v = k / c.g_abs;
        if v > out.a_min {
            out.a_min = v;
            out.extremal = Some(c.z);
        }
    }
    Ok(out)
}

fn multiplier<T: Real>(fam: &MapFamily<T>, cycle: &[Complex<T>]) -> T {
    cycle.iter().map(|&z| (fam.g.expanded_derivative_complex(z, 1) * fam.a).norm()).fold(T::one(), |p, d| p * d)
}

/// Forward orbit classification. Escape is declared once `|z| > K`; a cycle
/// is declared when the orbit returns within [`RETURN_TOLERANCE`] after `p`
/// steps and the multiplier along those points is below [`MULTIPLIER_MARGIN`].
pub fn orbit_fate<T: Real>(
    fam: &MapFamily<T>,
    z0: Complex<T>,
    budget: usize,
    max_period: usize,
) -> Result<OrbitFate<T>, ComplexError> {
    if budget == 0 {
        return Err(ComplexError::Budget { budget, max: usize::MAX });
    }
    let k = fam.g.cauchy_escape_radius(fam.a)?;
    let tol = T::lit(RETURN_TOLERANCE);
    let margin = T::lit(MULTIPLIER_MARGIN);
    let mut hist: Vec<Complex<T>> = Vec::with_capacity(budget + 1);
    let mut z = z0;
    for step in 0..=budget {
        let r = z.norm();
        if !r.is_finite() || r > k {
            return Ok(OrbitFate::AttractedToInfinity { step });
        }
        hist.push(z);
        for p in 1..=max_period.min(step) {
            if (z - hist[step - p]).norm() <= tol {
                let mu = multiplier(fam, &hist[step - p..step]);
                if mu < margin {
                    return Ok(OrbitFate::AttractedToCycle { period: p, multiplier: mu, point: z });
                }
                break;
            }
        }
        z = fam.g.eval_complex(z, fam.a);
    }
    Ok(OrbitFate::Undecided { budget })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalFate<T> {
    pub point: CriticalPoint<T>,
    /// `g(point) = 0`.
    pub in_e2: bool,
    pub fate: OrbitFate<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum CriticalOrbitVerdict<T> {
    /// Every critical orbit escapes or is attracted to a cycle: hyperbolic.
    AllCriticalsResolved { fates: Vec<CriticalFate<T>> },
    Unresolved { fates: Vec<CriticalFate<T>>, undecided: Vec<Complex<T>> },
}

impl<T> CriticalOrbitVerdict<T> {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, CriticalOrbitVerdict::AllCriticalsResolved { .. })
    }

    pub fn fates(&self) -> &[CriticalFate<T>] {
        match self {
            CriticalOrbitVerdict::AllCriticalsResolved { fates } | CriticalOrbitVerdict::Unresolved { fates, .. } => fates,
        }
    }
}

pub fn hyperbolicity_by_critical_orbits<T: Real>(
    fam: &MapFamily<T>,
    budget: usize,
) -> Result<CriticalOrbitVerdict<T>, ComplexError> {
    let e = critical_points(&fam.g)?;
    let points: Vec<(CriticalPoint<T>, bool)> =
        e.e1.iter().map(|&c| (c, false)).chain(e.e2.iter().map(|&c| (c, true))).collect();
    let fates: Result<Vec<CriticalFate<T>>, ComplexError> = points
        .par_iter()
        .map(|&(point, in_e2)| Ok(CriticalFate { point, in_e2, fate: orbit_fate(fam, point.z, budget, DEFAULT_MAX_PERIOD)? }))
        .collect();
    let fates = fates?;
    let undecided: Vec<Complex<T>> = fates.iter().filter(|f| !f.fate.is_resolved()).map(|f| f.point.z).collect();
    Ok(if undecided.is_empty() {
        CriticalOrbitVerdict::AllCriticalsResolved { fates }
    } else {
        CriticalOrbitVerdict::Unresolved { fates, undecided }
    })
}
