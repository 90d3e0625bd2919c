//! Turning points, derivative cutoffs, parameter thresholds and the landmark
//! points of the two-interval constructions on a root gap.

use serde::Serialize;

use super::classify::{zero_form_h, CaseClassification, CaseContext};
use super::{system, RealDynError, SCAN};
use crate::bracket::{bisect, extent_of_hold, leftmost_down_crossing, rightmost_up_crossing, BracketError};
use crate::num::Real;
use crate::polycore::{FactoredPolynomial, MapFamily};

fn bracket_err(branch: &str) -> impl FnOnce(BracketError) -> RealDynError + '_ {
    move |source| RealDynError::BracketFailure { branch: branch.to_string(), source }
}

fn gap<T: Real>(g: &FactoredPolynomial<T>, i0: usize) -> Result<(T, T), RealDynError> {
    let r = g.real_roots();
    if i0 + 1 >= r.len() {
        return Err(RealDynError::Precondition(format!("no root pair at index {i0}")));
    }
    Ok((r[i0].root, r[i0 + 1].root))
}

/// `x0 ≤ x0'` in the gap `(α_{i0}, α_{i0+1})` with `f' > 0` on `(α_{i0}, x0)`
/// and `f' < 0` on `(x0', α_{i0+1})`, assuming `f > 0` on the gap.
pub fn turning_points<T: Real>(fam: &MapFamily<T>, i0: usize) -> Result<(T, T), RealDynError> {
    let (lo, hi) = gap(&fam.g, i0)?;
    let mid = lo + (hi - lo) * T::lit(0.5);
    if fam.f(mid) <= T::zero() {
        return Err(RealDynError::BranchNotFound("f_a is not positive on the root gap".into()));
    }
    let x0 = leftmost_down_crossing(|x| fam.df(x), lo, hi, SCAN)
        .ok_or_else(|| RealDynError::BranchNotFound("no sign change of f' from + to -".into()))?;
    let x0p = rightmost_up_crossing(|x| -fam.df(x), lo, hi, SCAN)
        .ok_or_else(|| RealDynError::BranchNotFound("no sign change of f' into the decreasing branch".into()))?;
    if x0 > x0p {
        return Err(RealDynError::BranchNotFound("turning points out of order".into()));
    }
    Ok((x0, x0p))
}

/// `|g'/g|`, treating points on a root as satisfying every lower bound.
fn abs_log_derivative<T: Real>(g: &FactoredPolynomial<T>, x: T) -> T {
    g.log_derivative(x).map(|v| v.abs()).unwrap_or(T::infinity())
}

/// `x_l, x_r` with `|g'/g| ≥ λ/divisor` on `(α_{i0}, x_l] ∪ [x_r, α_{i0+1})`.
pub fn derivative_cutoffs<T: Real>(
    fam: &MapFamily<T>,
    i0: usize,
    lambda: T,
    divisor: T,
) -> Result<(T, T), RealDynError> {
    if !(lambda > T::one()) {
        return Err(RealDynError::Precondition("lambda must exceed 1".into()));
    }
    let (lo, hi) = gap(&fam.g, i0)?;
    let (x0, x0p) = turning_points(fam, i0)?;
    let bound = lambda / divisor;
    let holds = |x: T| abs_log_derivative(&fam.g, x) - bound;
    let not_found = |side: &str| RealDynError::CutoffNotFound {
        lambda: lambda.to_f64_lossy(),
        detail: format!("bound fails immediately next to the {side} root"),
    };
    let x_l = extent_of_hold(holds, lo, x0, SCAN).ok_or_else(|| not_found("left"))?;
    let x_r = extent_of_hold(holds, hi, x0p, SCAN).ok_or_else(|| not_found("right"))?;
    Ok((x_l, x_r))
}

/// Divisor of the log-derivative bound used by the active construction.
pub fn cutoff_divisor<T: Real>(g: &FactoredPolynomial<T>, cls: &CaseClassification) -> T {
    let roots = g.real_roots();
    match (cls.context, cls.work_i0) {
        (CaseContext::TwoPositiveRoots, Some(j)) => roots[j].root,
        (CaseContext::ZeroRootForm { .. }, Some(j)) => roots[j + 1].root,
        (_, Some(j)) => {
            let m = [roots[j].root.abs(), roots[j + 1].root.abs()]
                .into_iter()
                .filter(|v| *v > T::zero())
                .fold(T::infinity(), T::min);
            m * T::lit(0.5)
        }
        (_, None) => roots[0].root.abs() * T::lit(0.5),
    }
}

/// Minimum of `|g|` on `[lo, hi]` by dense sampling and golden-section refinement.
pub(crate) fn min_abs_g<T: Real>(g: &FactoredPolynomial<T>, lo: T, hi: T) -> T {
    let n = 1024usize;
    let at = |x: T| g.eval(x, T::one()).abs();
    if hi <= lo {
        return at(lo);
    }
    let step = (hi - lo) / T::from_usize_lossy(n);
    let xs: Vec<T> = (0..=n).map(|i| if i == n { hi } else { lo + step * T::from_usize_lossy(i) }).collect();
    let (k, mut best) = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, at(x)))
        .fold((0, T::infinity()), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if k > 0 && k < n {
        let (mut a, mut b) = (xs[k - 1], xs[k + 1]);
        let phi = T::lit(0.618_033_988_749_894_8);
        for _ in 0..120 {
            let c = b - (b - a) * phi;
            let d = a + (b - a) * phi;
            if at(c) < at(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.min(at((a + b) * T::lit(0.5)));
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds<T> {
    pub m0: T,
    pub a_min: T,
    /// Human-readable form of the bound on `|a|`.
    pub bound: String,
    pub clears: bool,
}

/// Sufficient parameter threshold of the active construction, together with
/// the auxiliary points it was computed from.
pub(crate) struct ThresholdParts<T> {
    pub thr: Thresholds<T>,
    pub x_l: Option<T>,
    pub x_r: Option<T>,
    pub eta: Option<T>,
    pub rho: Option<T>,
    pub n0: Option<T>,
    pub cutoffs: Vec<T>,
}

pub fn thresholds<T: Real>(
    fam: &MapFamily<T>,
    cls: &CaseClassification,
    lambda: T,
    epsilon: T,
) -> Result<Thresholds<T>, RealDynError> {
    threshold_parts(&cls.working(fam), cls, lambda, epsilon).map(|p| p.thr)
}

pub(crate) fn threshold_parts<T: Real>(
    work: &MapFamily<T>,
    cls: &CaseClassification,
    lambda: T,
    epsilon: T,
) -> Result<ThresholdParts<T>, RealDynError> {
    let roots = work.g.real_roots();
    let abs_a = work.a.abs();
    let mk = |m0: T, num: T, bound: &str| {
        let a_min = num / m0;
        Thresholds { m0, a_min, bound: bound.to_string(), clears: abs_a >= a_min }
    };
    match (cls.context, cls.work_i0) {
        (CaseContext::TwoPositiveRoots, Some(j)) => {
            let (x_l, x_r) = derivative_cutoffs(work, j, lambda, roots[j].root)?;
            let m0 = min_abs_g(&work.g, x_l, x_r);
            Ok(ThresholdParts {
                thr: mk(m0, roots[j + 1].root, "|a| >= alpha_{i0+1} / min|g| on [x_l, x_r]"),
                x_l: Some(x_l),
                x_r: Some(x_r),
                eta: None,
                rho: None,
                n0: None,
                cutoffs: vec![x_l, x_r],
            })
        }
        (CaseContext::ZeroRootForm { d1, d2 }, Some(j)) => {
            let b = roots[j + 1].root;
            let (x_l, x_r) = derivative_cutoffs(work, j, lambda, b)?;
            let eta = if d1 >= 2 { select_eta(work, j, d1, epsilon)? } else { x_l };
            let rho = if d2 >= 2 { select_rho(work, j, d2, epsilon)? } else { x_r };
            if eta >= rho {
                return Err(RealDynError::CutoffNotFound {
                    lambda: lambda.to_f64_lossy(),
                    detail: "eta and rho overlap".into(),
                });
            }
            let m0 = min_abs_g(&work.g, eta, rho);
            let mut n0 = None;
            if d1 >= 2 || d2 >= 2 {
                let ge = work.g.eval(eta, T::one()).abs();
                let gr = work.g.eval(rho, T::one()).abs();
                n0 = Some((eta / ge).max(b / gr));
            }
            Ok(ThresholdParts {
                thr: mk(m0, b, "|a| >= b / min|g| on [eta, rho]"),
                x_l: Some(x_l),
                x_r: Some(x_r),
                eta: Some(eta),
                rho: Some(rho),
                n0,
                cutoffs: vec![eta, rho],
            })
        }
        _ => {
            let nodes = system::root_nodes(work, cls, lambda)?;
            let cutoffs: Vec<T> = nodes.iter().flat_map(|n| [n.lo, n.hi]).filter(|&c| !is_root(&work.g, c)).collect();
            let m0 = cutoffs.iter().map(|&c| work.g.eval(c, T::one()).abs()).fold(T::infinity(), T::min);
            let num = cutoffs.iter().map(|c| c.abs()).fold(T::zero(), T::max);
            Ok(ThresholdParts {
                thr: mk(m0, num, "|a| >= max|y_i| / min|g(y_i)| over the cutoff points y_i"),
                x_l: None,
                x_r: None,
                eta: None,
                rho: None,
                n0: None,
                cutoffs,
            })
        }
    }
}

fn is_root<T: Real>(g: &FactoredPolynomial<T>, x: T) -> bool {
    g.real_roots().iter().any(|r| r.root == x)
}

/// Largest grid point `η` such that `f' > 0`, `f'' > 0` and
/// `g'/g ≥ (d1 − ε)/x` hold on `(0, η]`, shrunk by one grid cell.
fn select_eta<T: Real>(work: &MapFamily<T>, j: usize, d1: u32, eps: T) -> Result<T, RealDynError> {
    let b = work.g.real_roots()[j + 1].root;
    let c = T::from_usize_lossy(d1 as usize) - eps;
    let ok = |x: T| {
        work.df(x) > T::zero()
            && work.d2f(x) > T::zero()
            && work.g.log_derivative(x).map(|v| v >= c / x).unwrap_or(false)
    };
    grid_extent(ok, b, false).ok_or_else(|| RealDynError::CutoffNotFound {
        lambda: f64::NAN,
        detail: "no eta satisfies the left-root conditions".into(),
    })
}

/// Smallest grid point `ρ` such that `f' < 0`, `f'' > 0` and
/// `−g'/g ≥ (d2 − ε)/(b − x)` hold on `[ρ, b)`, shrunk by one grid cell.
fn select_rho<T: Real>(work: &MapFamily<T>, j: usize, d2: u32, eps: T) -> Result<T, RealDynError> {
    let b = work.g.real_roots()[j + 1].root;
    let c = T::from_usize_lossy(d2 as usize) - eps;
    let ok = |x: T| {
        work.df(x) < T::zero()
            && work.d2f(x) > T::zero()
            && work.g.log_derivative(x).map(|v| -v >= c / (b - x)).unwrap_or(false)
    };
    grid_extent(ok, b, true).ok_or_else(|| RealDynError::CutoffNotFound {
        lambda: f64::NAN,
        detail: "no rho satisfies the right-root conditions".into(),
    })
}

/// Walks a `2^k` grid on `(0, b)` from one end and returns the last holding
/// grid point minus one cell, refining `k` when the run is too short.
fn grid_extent<T: Real, F: Fn(T) -> bool>(ok: F, b: T, from_right: bool) -> Option<T> {
    for k in 10..=44u32 {
        let n = 1usize << k.min(20);
        let span = if k <= 20 { b } else { b * T::lit(0.5).powi((k - 20) as i32) };
        let cell = span / T::from_usize_lossy(n);
        let at = |i: usize| {
            let off = cell * T::from_usize_lossy(i);
            if from_right {
                b - off
            } else {
                off
            }
        };
        let mut last = 0usize;
        for i in 1..n {
            if ok(at(i)) {
                last = i;
            } else {
                break;
            }
        }
        if last >= 2 {
            return Some(at(last - 1));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UvExpectation {
    /// `d1 > d2 ≥ 2`: `u_a > b − v_a` for large `|a|`.
    UGreater,
    /// `d2 > d1 ≥ 2`: `u_a < b − v_a` for large `|a|`.
    ULess,
    /// `d1 = d2`: no asymptotic guarantee.
    Unguaranteed,
}

/// Landmark points of the construction, in the coordinates of the working
/// family (the mirrored one when `mirrored` is set).
///
/// In the two-positive-roots context `z_a` is the fixed point of the left
/// branch and `u_a` its preimage on the right branch; in the zero-root form
/// `u_a` is the fixed point near `0`, `v_a` solves `f(v) = b − v` and `w_a`
/// is the right preimage of `u_a`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandmarkPoints<T> {
    pub context: CaseContext,
    pub mirrored: bool,
    pub lambda: T,
    pub epsilon: T,
    pub eta: Option<T>,
    pub rho: Option<T>,
    pub x_l: Option<T>,
    pub x_r: Option<T>,
    pub turning: Option<(T, T)>,
    pub z_a: Option<T>,
    pub u_a: Option<T>,
    pub v_a: Option<T>,
    pub w_a: Option<T>,
    pub x_La: Option<T>,
    pub x_Ra: Option<T>,
    pub x_la: Option<T>,
    pub x_ra: Option<T>,
    pub m0: Option<T>,
    pub m1: Option<T>,
    pub n0: Option<T>,
    pub n1: Option<T>,
    pub a_min: Option<T>,
    pub bound: Option<String>,
    pub clears_threshold: Option<bool>,
    /// Cutoff points of the root-neighborhood construction.
    pub cutoffs: Vec<T>,
    /// Largest residual of the defining equations.
    pub residual: T,
    /// `f > q` throughout the central gap `(x_La, x_Ra)`.
    pub center_escapes: Option<bool>,
}

/// Geometric two-branch construction on a root gap `[α_j, α_{j+1}]`.
pub(crate) struct GapPoints<T> {
    pub x0: T,
    pub x0p: T,
    /// Left endpoint of `I_1`: fixed point of the increasing branch.
    pub p: T,
    /// Right endpoint of `I_2`: preimage of `p` on the decreasing branch.
    pub q: T,
    pub x_big_l: T,
    pub x_big_r: T,
    pub center_escapes: bool,
}

pub(crate) fn gap_points<T: Real>(work: &MapFamily<T>, j: usize) -> Result<GapPoints<T>, String> {
    let (lo, hi) = gap(&work.g, j).map_err(|e| e.to_string())?;
    let (x0, x0p) = turning_points(work, j).map_err(|e| e.to_string())?;
    let p = rightmost_up_crossing(|x| work.f(x) - x, lo, x0, SCAN)
        .ok_or_else(|| "the increasing branch has no fixed point".to_string())?;
    if work.f(x0p) <= p {
        return Err("the decreasing branch does not reach the fixed point".into());
    }
    let q = bisect(|x| work.f(x) - p, x0p, hi).map_err(|e| e.to_string())?.root();
    if work.f(x0) < q || work.f(x0p) < q {
        return Err(format!("the peak of f_a does not reach {q:e}"));
    }
    let x_big_l = bisect(|x| work.f(x) - q, p, x0).map_err(|e| e.to_string())?.root();
    let x_big_r = bisect(|x| work.f(x) - q, x0p, q).map_err(|e| e.to_string())?.root();
    let n = 256;
    let center_escapes = (1..n).all(|k| {
        let x = x_big_l + (x_big_r - x_big_l) * T::from_usize_lossy(k) / T::from_usize_lossy(n);
        work.f(x) > q
    });
    Ok(GapPoints { x0, x0p, p, q, x_big_l, x_big_r, center_escapes })
}

pub fn landmark_points<T: Real>(
    fam: &MapFamily<T>,
    cls: &CaseClassification,
    lambda: T,
    epsilon: T,
) -> Result<LandmarkPoints<T>, RealDynError> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(RealDynError::Precondition("epsilon must lie in (0, 1)".into()));
    }
    let work = cls.working(fam);
    let parts = threshold_parts(&work, cls, lambda, epsilon);
    let mut lm = LandmarkPoints {
        context: cls.context,
        mirrored: cls.mirrored,
        lambda,
        epsilon,
        eta: None,
        rho: None,
        x_l: None,
        x_r: None,
        turning: None,
        z_a: None,
        u_a: None,
        v_a: None,
        w_a: None,
        x_La: None,
        x_Ra: None,
        x_la: None,
        x_ra: None,
        m0: None,
        m1: None,
        n0: None,
        n1: None,
        a_min: None,
        bound: None,
        clears_threshold: None,
        cutoffs: Vec::new(),
        residual: T::zero(),
        center_escapes: None,
    };
    if let Ok(p) = &parts {
        lm.eta = p.eta;
        lm.rho = p.rho;
        lm.x_l = p.x_l;
        lm.x_r = p.x_r;
        lm.n0 = p.n0;
        lm.m0 = Some(p.thr.m0);
        lm.a_min = Some(p.thr.a_min);
        lm.bound = Some(p.thr.bound.clone());
        lm.clears_threshold = Some(p.thr.clears);
        lm.cutoffs = p.cutoffs.clone();
    }
    let j = match (cls.context, cls.work_i0) {
        (CaseContext::TwoPositiveRoots | CaseContext::ZeroRootForm { .. }, Some(j)) => j,
        _ => return parts.map(|_| lm),
    };
    let gp = gap_points(&work, j).map_err(|detail| {
        let (bound, a_min) = match &parts {
            Ok(p) => (p.thr.bound.clone(), p.thr.a_min.to_f64_lossy()),
            Err(e) => (format!("threshold unavailable ({e})"), f64::NAN),
        };
        RealDynError::HypothesesNotSatisfied { bound, a_min, a: work.a.abs().to_f64_lossy(), detail }
    })?;
    lm.turning = Some((gp.x0, gp.x0p));
    lm.x_La = Some(gp.x_big_l);
    lm.x_Ra = Some(gp.x_big_r);
    lm.center_escapes = Some(gp.center_escapes);
    let f = |x: T| work.f(x);
    let mut res = (f(gp.x_big_l) - gp.q).abs().max((f(gp.x_big_r) - gp.q).abs()).max((f(gp.q) - gp.p).abs());
    match cls.context {
        CaseContext::TwoPositiveRoots => {
            lm.z_a = Some(gp.p);
            lm.u_a = Some(gp.q);
            res = res.max((f(gp.p) - gp.p).abs());
        }
        CaseContext::ZeroRootForm { d1, d2 } => {
            let b = work.g.real_roots()[j + 1].root;
            if d1 >= 2 {
                lm.u_a = Some(gp.p);
                lm.w_a = Some(gp.q);
                res = res.max((f(gp.p) - gp.p).abs());
            }
            if d2 >= 2 {
                let v = leftmost_down_crossing(|x| f(x) + x - b, gp.x0p, b, SCAN)
                    .ok_or_else(|| RealDynError::BracketFailure {
                        branch: "v_a on the decreasing branch".into(),
                        source: BracketError::NotBracketed {
                            lo: gp.x0p.to_f64_lossy(),
                            hi: b.to_f64_lossy(),
                            f_lo: f64::NAN,
                            f_hi: f64::NAN,
                        },
                    })?;
                res = res.max((f(v) - (b - v)).abs());
                lm.v_a = Some(v);
            }
            if f(gp.x0) >= b && f(gp.x0p) >= b {
                let xl = bisect(|x| f(x) - b, gp.p, gp.x0).map_err(bracket_err("x_la"))?.root();
                let xr = bisect(|x| f(x) - b, gp.x0p, b).map_err(bracket_err("x_ra"))?.root();
                lm.x_la = Some(xl);
                lm.x_ra = Some(xr);
            }
            if d1 >= 2 && d2 >= 2 && d1 != d2 {
                let h = zero_form_h(&work.g, j);
                let (hmin, hmax) = abs_range(&h, T::zero(), b);
                let e = T::one() / T::from_usize_lossy(d1.abs_diff(d2) as usize);
                lm.m1 = Some((hmax / hmin).powf(e));
            }
        }
        _ => unreachable!(),
    }
    lm.residual = res;
    Ok(lm)
}

fn abs_range<T: Real>(p: &FactoredPolynomial<T>, lo: T, hi: T) -> (T, T) {
    let n = 1024;
    (0..=n)
        .map(|k| p.eval(lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(n), T::one()).abs())
        .fold((T::infinity(), T::zero()), |(mn, mx), v| (mn.min(v), mx.max(v)))
}

fn zero_form_pair<T: Real>(g: &FactoredPolynomial<T>, a: T) -> Result<(CaseClassification, u32, u32), RealDynError> {
    let cls = super::classify(g, a, None)?;
    match cls.context {
        CaseContext::ZeroRootForm { d1, d2 } => Ok((cls, d1, d2)),
        other => Err(RealDynError::Precondition(format!("requires the zero-root form, found {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample<T> {
    pub a: T,
    pub u: Option<T>,
    pub v: Option<T>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointCurves<T> {
    pub samples: Vec<CurveSample<T>>,
    /// `u` strictly decreasing along the successful samples (when tracked).
    pub u_decreasing: Option<bool>,
    /// `v` strictly increasing along the successful samples (when tracked).
    pub v_increasing: Option<bool>,
}

/// Samples `u(a)` (for `d1 ≥ 2`) and `v(a)` (for `d2 ≥ 2`) along a grid of
/// increasing `|a|`. Each solve first tries the bracket ending at the
/// previous value, which keeps the selection on one continuous branch.
pub fn fixed_point_curves<T: Real>(g: &FactoredPolynomial<T>, a_grid: &[T]) -> Result<FixedPointCurves<T>, RealDynError> {
    let first = *a_grid.first().ok_or_else(|| RealDynError::Precondition("empty parameter grid".into()))?;
    let (_, d1, d2) = zero_form_pair(g, first)?;
    if d1 < 2 && d2 < 2 {
        return Err(RealDynError::Precondition("u(a) needs d1 >= 2 and v(a) needs d2 >= 2".into()));
    }
    let mut samples = Vec::with_capacity(a_grid.len());
    let (mut prev_u, mut prev_v): (Option<T>, Option<T>) = (None, None);
    for &a in a_grid {
        let res = zero_form_pair(g, a).and_then(|(cls, _, _)| {
            let work = cls.working(&MapFamily::new(g.clone(), a));
            let j = cls.work_i0.expect("pair");
            let b = work.g.real_roots()[j + 1].root;
            let (x0, x0p) = turning_points(&work, j)?;
            let u = if d1 >= 2 {
                let seeded = prev_u.and_then(|pu| rightmost_up_crossing(|x| work.f(x) - x, T::zero(), pu.min(x0), SCAN));
                let u = seeded.or_else(|| rightmost_up_crossing(|x| work.f(x) - x, T::zero(), x0, SCAN));
                Some(u.ok_or_else(|| RealDynError::BracketFailure {
                    branch: "u(a)".into(),
                    source: BracketError::NotBracketed { lo: 0.0, hi: x0.to_f64_lossy(), f_lo: f64::NAN, f_hi: f64::NAN },
                })?)
            } else {
                None
            };
            let v = if d2 >= 2 {
                let h = |x: T| work.f(x) + x - b;
                let seeded = prev_v.and_then(|pv| leftmost_down_crossing(h, pv.max(x0p), b, SCAN));
                let v = seeded.or_else(|| leftmost_down_crossing(h, x0p, b, SCAN));
                Some(v.ok_or_else(|| RealDynError::BracketFailure {
                    branch: "v(a)".into(),
                    source: BracketError::NotBracketed {
                        lo: x0p.to_f64_lossy(),
                        hi: b.to_f64_lossy(),
                        f_lo: f64::NAN,
                        f_hi: f64::NAN,
                    },
                })?)
            } else {
                None
            };
            Ok((u, v))
        });
        match res {
            Ok((u, v)) => {
                prev_u = u.or(prev_u);
                prev_v = v.or(prev_v);
                samples.push(CurveSample { a, u, v, error: None });
            }
            Err(e) => samples.push(CurveSample { a, u: None, v: None, error: Some(e.to_string()) }),
        }
    }
    let strictly = |vals: Vec<T>, dec: bool| vals.windows(2).all(|w| if dec { w[1] < w[0] } else { w[1] > w[0] });
    let us: Vec<T> = samples.iter().filter_map(|s| s.u).collect();
    let vs: Vec<T> = samples.iter().filter_map(|s| s.v).collect();
    Ok(FixedPointCurves {
        u_decreasing: (d1 >= 2).then(|| strictly(us, true)),
        v_increasing: (d2 >= 2).then(|| strictly(vs, false)),
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UvOrdering<T> {
    pub u_a: T,
    pub v_a: T,
    pub b_minus_v: T,
    /// Sign of `u_a − (b − v_a)`.
    pub sign: i8,
    pub expected: UvExpectation,
    /// Parameter threshold of the one-sided fixed-point constructions.
    pub n0: Option<T>,
    /// Smallest sampled `|a|` from which the ordering conditions hold.
    pub n1_estimate: Option<T>,
}

pub fn compare_u_vs_bv<T: Real>(g: &FactoredPolynomial<T>, a: T) -> Result<UvOrdering<T>, RealDynError> {
    let (cls, d1, d2) = zero_form_pair(g, a)?;
    if d1 < 2 || d2 < 2 {
        return Err(RealDynError::Precondition("the ordering needs d1 >= 2 and d2 >= 2".into()));
    }
    let fam = MapFamily::new(g.clone(), a);
    let lm = landmark_points(&fam, &cls, T::lit(1.1), T::lit(0.5))?;
    let j = cls.work_i0.expect("pair");
    let b = cls.working(&fam).g.real_roots()[j + 1].root;
    let u = lm.u_a.expect("u_a for d1 >= 2");
    let v = lm.v_a.expect("v_a for d2 >= 2");
    let diff = u - (b - v);
    let sign = if diff > T::zero() { 1 } else if diff < T::zero() { -1 } else { 0 };
    let expected = match d1.cmp(&d2) {
        std::cmp::Ordering::Greater => UvExpectation::UGreater,
        std::cmp::Ordering::Less => UvExpectation::ULess,
        std::cmp::Ordering::Equal => UvExpectation::Unguaranteed,
    };
    let n1_estimate = if expected == UvExpectation::Unguaranteed { None } else { estimate_n1(g, a, &lm, d1, d2, b) };
    Ok(UvOrdering { u_a: u, v_a: v, b_minus_v: b - v, sign, expected, n0: lm.n0, n1_estimate })
}

/// Scans `|a|` upward from `N0` on a log grid (eight points per decade) for
/// the first value at which the smallness and ratio conditions behind the
/// ordering hold.
fn estimate_n1<T: Real>(g: &FactoredPolynomial<T>, a: T, lm: &LandmarkPoints<T>, d1: u32, d2: u32, b: T) -> Option<T> {
    let n0 = lm.n0?.max(T::one());
    let m1 = lm.m1?;
    let (dl, ds) = if d1 > d2 { (d1, d2) } else { (d2, d1) };
    let cap = T::from_usize_lossy((ds - 1) as usize) * b / T::from_usize_lossy((dl + ds - 1) as usize);
    let sgn = a.signum();
    let ten = T::lit(10.0);
    for k in 0..=12 * 8 {
        let mag = n0 * ten.powf(T::from_usize_lossy(k) / T::lit(8.0));
        let cls = super::classify(g, sgn * mag, None).ok()?;
        let Ok(p) = landmark_points(&MapFamily::new(g.clone(), sgn * mag), &cls, T::lit(1.1), T::lit(0.5)) else {
            continue;
        };
        let (Some(u), Some(v)) = (p.u_a, p.v_a) else { continue };
        let small = u.max(b - v) < cap;
        let s = if d1 > d2 { u } else { b - v };
        if small && (b - s) / s > m1 {
            return Some(mag);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryDerivative<T> {
    pub u_a: T,
    pub w_a: T,
    /// `f_a'(w_a)` from the factored derivative.
    pub exact: T,
    /// `d1 u/w − d2 u/(b − w) + u h'(w)/h(w)`.
    pub identity_value: T,
    /// Leading-order asymptotic value of `f_a'(w_a)`.
    pub asymptotic: T,
    /// The `u h'(w)/h(w)` term.
    pub h_term: T,
}

pub fn boundary_derivative<T: Real>(fam: &MapFamily<T>) -> Result<BoundaryDerivative<T>, RealDynError> {
    let (cls, d1, d2) = zero_form_pair(&fam.g, fam.a)?;
    if d1 < 2 || d2 < 2 {
        return Err(RealDynError::Precondition("the boundary derivative needs d1 >= 2 and d2 >= 2".into()));
    }
    let work = cls.working(fam);
    let j = cls.work_i0.expect("pair");
    let b = work.g.real_roots()[j + 1].root;
    let gp = gap_points(&work, j).map_err(|detail| RealDynError::HypothesesNotSatisfied {
        bound: "|a| >= b / min|g| on [eta, rho]".into(),
        a_min: f64::NAN,
        a: fam.a.abs().to_f64_lossy(),
        detail,
    })?;
    let (u, w) = (gp.p, gp.q);
    let h = zero_form_h(&work.g, j);
    let h_term = u * h.log_derivative(w)?;
    let fd1 = T::from_usize_lossy(d1 as usize);
    let fd2 = T::from_usize_lossy(d2 as usize);
    let formula = fd1 * u / w - fd2 * u / (b - w) + h_term;
    let alpha1 = b.powi(d2 as i32) * h.eval(T::zero(), T::one());
    let alpha2 = b.powi(d1 as i32) * h.eval(b, T::one());
    let den = (fd1 - T::one()) * fd2;
    let asym = -fd2
        * work.a.abs().powf((fd1 - fd2) / den)
        * alpha1.abs().powf((T::one() - fd2) / den)
        * alpha2.abs().powf(T::one() / fd2);
    Ok(BoundaryDerivative { u_a: u, w_a: w, exact: work.df(w), identity_value: formula, asymptotic: asym, h_term })
}
