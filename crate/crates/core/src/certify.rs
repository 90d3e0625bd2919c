//! Hyperbolicity certificates for the invariant set of an interval system.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bracket::bisect;
use crate::complexdyn::{critical_points, hyperbolicity_by_critical_orbits, orbit_fate, CriticalFate, OrbitFate, DEFAULT_MAX_PERIOD};
use crate::num::Real;
use crate::polycore::MapFamily;
use crate::realdyn::{CylinderTree, IntervalSystem};

const SCAN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Hyperbolic,
    NonHyperbolic,
    Undecided,
}

/// Strength of a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Grade {
    /// Holds at numeric tolerance.
    Decisive,
    /// Decisive given the evidence that the invariant set lies in the Julia set.
    ModuloJuliaEvidence,
    /// Supported by a finite sample only.
    FiniteSample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Route<T> {
    UniformBound { lambda: T, min_derivative: T, argmin: T },
    PerPoint { samples: usize, max_k: usize },
    ComplexCriticalOrbits { fates: Vec<CriticalFate<T>> },
    Witness { point: T, orbit: Vec<T>, orbit_derivative: T },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityCertificate<T> {
    pub verdict: Verdict,
    pub grade: Option<Grade>,
    pub route: Option<Route<T>>,
    pub lambda: Option<T>,
    #[serde(rename = "C")]
    pub c: Option<T>,
    pub min_derivative: Option<T>,
    pub witnesses: Vec<T>,
    pub diagnostics: BTreeMap<String, String>,
}

impl<T> HyperbolicityCertificate<T> {
    fn undecided() -> Self {
        Self {
            verdict: Verdict::Undecided,
            grade: None,
            route: None,
            lambda: None,
            c: None,
            min_derivative: None,
            witnesses: Vec::new(),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn is_decisive(&self) -> bool {
        self.verdict != Verdict::Undecided
    }

    fn note(mut self, key: &str, value: impl Into<String>) -> Self {
        self.diagnostics.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Auto,
    Uniform,
    Perpoint,
    Complex,
    Witness,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "uniform" => Ok(Strategy::Uniform),
            "perpoint" | "per-point" => Ok(Strategy::Perpoint),
            "complex" => Ok(Strategy::Complex),
            "witness" => Ok(Strategy::Witness),
            other => Err(format!("unknown strategy {other:?}; expected auto, uniform, perpoint, complex or witness")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::Auto => "auto",
            Strategy::Uniform => "uniform",
            Strategy::Perpoint => "perpoint",
            Strategy::Complex => "complex",
            Strategy::Witness => "witness",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Iteration budget for critical orbits and the Julia-set evidence check.
    pub budget: usize,
    /// Largest `k` tried per representative; `None` uses the tree depth.
    pub k_max: Option<usize>,
    /// Orbit length followed for a critical witness.
    pub witness_budget: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { budget: 500, k_max: None, witness_budget: 64 }
    }
}

/// `|(f_a^n)'(x)|` by the chain rule, accumulated as a sum of logarithms.
pub fn chain_derivative<T: Real>(fam: &MapFamily<T>, x: T, n: usize) -> T {
    log_chain_derivative(fam, x, n).exp()
}

/// `ln |(f_a^n)'(x)|`, `−∞` when a critical point lies on the orbit.
pub fn log_chain_derivative<T: Real>(fam: &MapFamily<T>, x: T, n: usize) -> T {
    let mut y = x;
    let mut acc = T::zero();
    for _ in 0..n {
        let d = fam.df(y).abs();
        if d == T::zero() {
            return T::neg_infinity();
        }
        acc = acc + d.ln();
        y = fam.f(y);
    }
    acc
}

/// Points of `[lo, hi]` where `|f_a'|` can attain its minimum: the
/// endpoints and the zeros of `f_a''`.
fn derivative_candidates<T: Real>(fam: &MapFamily<T>, lo: T, hi: T) -> Vec<T> {
    let mut out = vec![lo, hi];
    let step = (hi - lo) / T::from_usize_lossy(SCAN);
    let mut x0 = lo;
    let mut s0 = fam.d2f(lo);
    for k in 1..=SCAN {
        let x1 = if k == SCAN { hi } else { lo + step * T::from_usize_lossy(k) };
        let s1 = fam.d2f(x1);
        if s1 == T::zero() {
            out.push(x1);
        } else if s0 * s1 < T::zero() {
            if let Ok(b) = bisect(|x| fam.d2f(x), x0, x1) {
                out.push(b.root());
            }
        }
        x0 = x1;
        s0 = s1;
    }
    out
}

fn min_abs_derivative<T: Real>(fam: &MapFamily<T>, spans: impl Iterator<Item = (T, T)>) -> (T, T) {
    let mut best = (T::infinity(), T::nan());
    for (lo, hi) in spans {
        for x in derivative_candidates(fam, lo, hi) {
            let d = fam.df(x).abs();
            if d < best.0 {
                best = (d, x);
            }
        }
    }
    best
}

/// Uniform expansion bound `min |f_a'|` over the union of the intervals.
pub fn certify_uniform<T: Real>(
    fam: &MapFamily<T>,
    system: &IntervalSystem<T>,
    tree: Option<&CylinderTree<T>>,
) -> HyperbolicityCertificate<T> {
    let (min, argmin) = min_abs_derivative(fam, system.intervals.iter().map(|b| (b.lo, b.hi)));
    let mut cert = HyperbolicityCertificate::undecided();
    cert.min_derivative = Some(min);
    if let Some(t) = tree {
        let (lmin, _) = min_abs_derivative(fam, t.deepest().iter().map(|c| (c.lo, c.hi)));
        cert = cert.note("uniform.min_over_deepest_cylinders", format!("{lmin:e}"));
    }
    if min > T::one() {
        cert.verdict = Verdict::Hyperbolic;
        cert.grade = Some(Grade::Decisive);
        cert.lambda = Some(min);
        cert.c = Some(T::one());
        cert.route = Some(Route::UniformBound { lambda: min, min_derivative: min, argmin });
        cert
    } else {
        cert.note("uniform", format!("min |f'| = {min:e} at x = {argmin:e} does not exceed 1"))
    }
}

fn representatives<T: Real>(tree: &CylinderTree<T>) -> Vec<T> {
    tree.deepest().iter().flat_map(|c| [c.lo, c.midpoint(), c.hi]).collect()
}

/// Least `k ≤ k_max` with `|(f_a^k)'(x)| > 1` at each cylinder endpoint and
/// midpoint of the deepest level.
pub fn certify_per_point<T: Real>(fam: &MapFamily<T>, tree: &CylinderTree<T>, k_max: usize) -> HyperbolicityCertificate<T> {
    let cert = HyperbolicityCertificate::undecided();
    if k_max == 0 || tree.depth < k_max {
        return cert.note("perpoint", format!("tree depth {} is below k_max = {k_max}", tree.depth));
    }
    let reps = representatives(tree);
    let ks: Vec<Option<usize>> = reps
        .par_iter()
        .map(|&x| {
            let mut y = x;
            let mut acc = T::zero();
            for k in 1..=k_max {
                let d = fam.df(y).abs();
                if d == T::zero() {
                    return None;
                }
                acc = acc + d.ln();
                if acc > T::zero() {
                    return Some(k);
                }
                y = fam.f(y);
            }
            None
        })
        .collect();
    let failed: Vec<T> = reps.iter().zip(&ks).filter(|(_, k)| k.is_none()).map(|(&x, _)| x).collect();
    if failed.is_empty() {
        let max_k = ks.iter().flatten().copied().max().unwrap_or(0);
        let mut c = cert.note("perpoint", "finite-sample evidence only");
        c.verdict = Verdict::Hyperbolic;
        c.grade = Some(Grade::FiniteSample);
        c.route = Some(Route::PerPoint { samples: reps.len(), max_k });
        c
    } else {
        let mut c = cert.note("perpoint", format!("{} of {} representatives never expand within k_max = {k_max}", failed.len(), reps.len()));
        c.witnesses = failed.into_iter().take(16).collect();
        c
    }
}

fn in_union<T: Real>(system: &IntervalSystem<T>, x: T) -> bool {
    let tol = system.covering_tolerance();
    system.intervals.iter().any(|b| b.lo - tol <= x && x <= b.hi + tol)
}

/// A real critical point in the union of the intervals whose orbit is
/// exactly eventually periodic inside the union.
pub fn detect_nonhyperbolic_witness<T: Real>(
    fam: &MapFamily<T>,
    system: &IntervalSystem<T>,
    budget: usize,
) -> Option<HyperbolicityCertificate<T>> {
    let crit = critical_points(&fam.g).ok()?;
    for c in crit.iter().filter(|c| c.is_real()) {
        let x = c.z.re;
        if !in_union(system, x) {
            continue;
        }
        let mut orbit = vec![x];
        let mut periodic = false;
        for _ in 0..budget {
            let y = fam.f(*orbit.last().expect("nonempty"));
            if !in_union(system, y) {
                break;
            }
            if orbit.contains(&y) {
                periodic = true;
                orbit.push(y);
                break;
            }
            orbit.push(y);
        }
        if !periodic {
            continue;
        }
        let mut cert = HyperbolicityCertificate::undecided();
        let d = fam.df(x);
        cert.verdict = Verdict::NonHyperbolic;
        cert.grade = Some(Grade::Decisive);
        cert.min_derivative = Some(d.abs());
        cert.witnesses = vec![x];
        cert.route = Some(Route::Witness { point: x, orbit, orbit_derivative: d.abs() });
        return Some(cert.note("witness", "critical point with an exactly periodic orbit in the interval union"));
    }
    None
}

/// Complex route, gated on the representatives neither escaping nor being
/// attracted to a cycle within `min(budget, depth)` steps.
pub fn certify_complex<T: Real>(
    fam: &MapFamily<T>,
    tree: Option<&CylinderTree<T>>,
    budget: usize,
) -> HyperbolicityCertificate<T> {
    let mut cert = HyperbolicityCertificate::undecided();
    if let Some(t) = tree {
        let steps = budget.min(t.depth).max(1);
        let reps: Vec<T> = t.deepest().iter().map(|c| c.midpoint()).collect();
        let bad = reps
            .par_iter()
            .filter(|&&x| {
                !matches!(orbit_fate(fam, Complex::new(x, T::zero()), steps, DEFAULT_MAX_PERIOD), Ok(OrbitFate::Undecided { .. }))
            })
            .count();
        if bad > 0 {
            return cert.note("complex", format!("{bad} cylinder midpoints leave within {steps} steps"));
        }
        cert = cert.note("complex.julia_evidence", format!("{} midpoints stay for {steps} steps", reps.len()));
    }
    match hyperbolicity_by_critical_orbits(fam, budget) {
        Ok(v) if v.is_hyperbolic() => {
            let fates = v.fates().to_vec();
            if let Some(t) = tree {
                let n = t.depth;
                let rates: Vec<T> =
                    t.deepest().iter().map(|c| log_chain_derivative(fam, c.midpoint(), n) / T::from_usize_lossy(n)).collect();
                let lo = rates.iter().copied().fold(T::infinity(), T::min).exp();
                cert = cert.note("complex.min_expansion_rate", format!("{lo:e}"));
            }
            cert.verdict = Verdict::Hyperbolic;
            cert.grade = Some(Grade::ModuloJuliaEvidence);
            cert.route = Some(Route::ComplexCriticalOrbits { fates });
            cert
        }
        Ok(v) => {
            let fates = v.fates().iter().filter(|f| !f.fate.is_resolved()).count();
            cert.note("complex", format!("{fates} critical orbits undecided within {budget} steps"))
        }
        Err(e) => cert.note("complex", e.to_string()),
    }
}

/// Runs one route, or for `Auto` the routes uniform, witness, complex and
/// per-point in turn, returning the first decisive certificate.
pub fn certify<T: Real>(
    fam: &MapFamily<T>,
    system: &IntervalSystem<T>,
    tree: &CylinderTree<T>,
    strategy: Strategy,
    opts: CertifyOptions,
) -> HyperbolicityCertificate<T> {
    let k_max = opts.k_max.unwrap_or(tree.depth);
    let witness = || {
        detect_nonhyperbolic_witness(fam, system, opts.witness_budget)
            .unwrap_or_else(|| HyperbolicityCertificate::undecided().note("witness", "no exact critical witness"))
    };
    match strategy {
        Strategy::Uniform => certify_uniform(fam, system, Some(tree)),
        Strategy::Perpoint => certify_per_point(fam, tree, k_max),
        Strategy::Complex => certify_complex(fam, Some(tree), opts.budget),
        Strategy::Witness => witness(),
        Strategy::Auto => {
            let mut diagnostics = BTreeMap::new();
            let routes: [&dyn Fn() -> HyperbolicityCertificate<T>; 4] = [
                &|| certify_uniform(fam, system, Some(tree)),
                &witness,
                &|| certify_complex(fam, Some(tree), opts.budget),
                &|| certify_per_point(fam, tree, k_max),
            ];
            let mut min_derivative = None;
            for route in routes {
                let cert = route();
                min_derivative = min_derivative.or(cert.min_derivative);
                if cert.is_decisive() {
                    let mut cert = cert;
                    for (k, v) in diagnostics {
                        cert.diagnostics.entry(k).or_insert(v);
                    }
                    cert.min_derivative = cert.min_derivative.or(min_derivative);
                    return cert;
                }
                diagnostics.extend(cert.diagnostics);
            }
            let mut out = HyperbolicityCertificate::undecided();
            out.diagnostics = diagnostics;
            out.min_derivative = min_derivative;
            out
        }
    }
}
