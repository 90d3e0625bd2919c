//! Trapping-interval systems and monotone-branch preimages.

use serde::Serialize;

use super::classify::{CaseClassification, CaseContext};
use super::landmarks::{cutoff_divisor, gap_points, landmark_points, LandmarkPoints};
use super::{RealDynError, SCAN};
use crate::bracket::{bisect, extent_of_hold};
use crate::num::Real;
use crate::polycore::MapFamily;
use crate::symbolic::TransitionMatrix;

/// Closed interval on which `f_a` is strictly monotone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch<T> {
    pub lo: T,
    pub hi: T,
    pub increasing: bool,
}

impl<T: Real> Branch<T> {
    pub fn new(lo: T, hi: T, increasing: bool) -> Self {
        Self { lo, hi, increasing }
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> T {
        self.lo + (self.hi - self.lo) * T::lit(0.5)
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `(min, max)` of `f_a` over the branch, read off the endpoints.
    pub fn image(&self, fam: &MapFamily<T>) -> (T, T) {
        let (a, b) = (fam.f(self.lo), fam.f(self.hi));
        (a.min(b), a.max(b))
    }

    fn mirrored(&self) -> Self {
        Self { lo: -self.hi, hi: -self.lo, increasing: self.increasing }
    }
}

/// Disjoint monotone branches `I_1 < … < I_k` with their covering matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSystem<T> {
    pub intervals: Vec<Branch<T>>,
    pub matrix: TransitionMatrix,
    /// Ambient interval of the construction.
    pub ambient: (T, T),
    /// Length scale used for tolerances.
    pub scale: T,
}

impl<T: Real> IntervalSystem<T> {
    pub fn covering_tolerance(&self) -> T {
        covering_tolerance(self.scale)
    }

    /// Index of the interval containing `x`.
    pub fn locate(&self, x: T) -> Option<usize> {
        self.intervals.iter().position(|b| b.contains(x))
    }

    /// Builds a system from explicit intervals, computing the covering matrix.
    pub fn from_intervals(fam: &MapFamily<T>, intervals: Vec<Branch<T>>, ambient: (T, T)) -> Result<Self, RealDynError> {
        let scale = fam.scale();
        let matrix = covering_matrix(fam, &intervals, covering_tolerance(scale))?;
        Ok(Self { intervals, matrix, ambient, scale })
    }
}

fn covering_tolerance<T: Real>(scale: T) -> T {
    T::rel_tol(1e-10) * scale
}

fn covers<T: Real>(fam: &MapFamily<T>, from: &Branch<T>, to: &Branch<T>, tol: T) -> bool {
    let (lo, hi) = from.image(fam);
    lo <= to.lo + tol && hi >= to.hi - tol
}

fn covering_matrix<T: Real>(fam: &MapFamily<T>, iv: &[Branch<T>], tol: T) -> Result<TransitionMatrix, RealDynError> {
    for w in iv.windows(2) {
        if !(w[0].hi < w[1].lo) {
            return Err(RealDynError::CoveringFailed(format!(
                "intervals [{:e}, {:e}] and [{:e}, {:e}] are not disjoint",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
    }
    let rows: Vec<Vec<u8>> = iv.iter().map(|s| iv.iter().map(|t| covers(fam, s, t, tol) as u8).collect()).collect();
    TransitionMatrix::from_rows(&rows).map_err(|e| RealDynError::CoveringFailed(format!("{e}; rows {rows:?}")))
}

/// `x` on the branch with `f_a(x) = y`. Values of `y` outside the endpoint
/// images by at most the covering tolerance snap to the nearer endpoint.
pub fn preimage_on_branch<T: Real>(fam: &MapFamily<T>, branch: &Branch<T>, y: T) -> Result<T, RealDynError> {
    let (f_lo, f_hi) = (fam.f(branch.lo), fam.f(branch.hi));
    let (min, max) = (f_lo.min(f_hi), f_lo.max(f_hi));
    let tol = covering_tolerance(fam.scale());
    let not_bracketed = || RealDynError::NotBracketed { y: y.to_f64_lossy(), lo: min.to_f64_lossy(), hi: max.to_f64_lossy() };
    if y < min - tol || y > max + tol || !y.is_finite() {
        return Err(not_bracketed());
    }
    if y <= min {
        return Ok(if f_lo <= f_hi { branch.lo } else { branch.hi });
    }
    if y >= max {
        return Ok(if f_lo >= f_hi { branch.lo } else { branch.hi });
    }
    bisect(|x| fam.f(x) - y, branch.lo, branch.hi).map(|b| b.root()).map_err(|_| not_bracketed())
}

/// Builds the interval system of the classified case. Intervals are
/// reported in the coordinates of `fam` (mirrored cases are mapped back).
pub fn trapping_system<T: Real>(
    fam: &MapFamily<T>,
    cls: &CaseClassification,
    lambda: T,
    epsilon: T,
) -> Result<(IntervalSystem<T>, LandmarkPoints<T>), RealDynError> {
    let lm = landmark_points(fam, cls, lambda, epsilon)?;
    let work = cls.working(fam);
    let (mut intervals, ambient) = match (cls.context, cls.work_i0) {
        (CaseContext::TwoPositiveRoots | CaseContext::ZeroRootForm { .. }, Some(j)) => {
            let gp = gap_points(&work, j).map_err(RealDynError::CoveringFailed)?;
            let r = work.g.real_roots();
            (
                vec![Branch::new(gp.p, gp.x_big_l, true), Branch::new(gp.x_big_r, gp.q, false)],
                (r[j].root, r[j + 1].root),
            )
        }
        _ => generic_intervals(&work, cls, lambda)?,
    };
    let mut ambient = ambient;
    if cls.mirrored {
        intervals = intervals.iter().rev().map(Branch::mirrored).collect();
        ambient = (-ambient.1, -ambient.0);
    }
    let system = IntervalSystem::from_intervals(fam, intervals, ambient)?;
    if matches!(cls.context, CaseContext::TwoPositiveRoots | CaseContext::ZeroRootForm { .. })
        && system.matrix != TransitionMatrix::full(2)
    {
        return Err(RealDynError::CoveringFailed(format!(
            "f_a(I_i) does not contain I_1 ∪ I_2; matrix {:?}",
            system.matrix.rows()
        )));
    }
    Ok((system, lm))
}

/// One-sided (even multiplicity) or two-sided (odd multiplicity) monotone
/// neighborhoods of the relevant real roots on which
/// `|g'/g| ≥ λ / divisor` holds.
pub(crate) fn root_nodes<T: Real>(
    work: &MapFamily<T>,
    cls: &CaseClassification,
    lambda: T,
) -> Result<Vec<Branch<T>>, RealDynError> {
    let roots = work.g.real_roots();
    let idx: Vec<usize> = match cls.work_i0 {
        Some(j) => vec![j, j + 1],
        None => vec![0],
    };
    let divisor = cutoff_divisor(&work.g, cls);
    let bound = lambda / divisor;
    let holds = |x: T| work.g.log_derivative(x).map(|v| v.abs()).unwrap_or(T::infinity()) - bound;
    let far = T::lit(4.0) * work.scale();
    let mut nodes = Vec::new();
    for &k in &idx {
        let alpha = roots[k].root;
        let cap = if alpha == T::zero() { divisor } else { alpha.abs() * T::lit(0.5) };
        let left_gap = if k > 0 { (alpha - roots[k - 1].root) * T::lit(0.5) } else { far };
        let right_gap = if k + 1 < roots.len() { (roots[k + 1].root - alpha) * T::lit(0.5) } else { far };
        let left = extent_of_hold(holds, alpha, alpha - left_gap.min(cap), SCAN);
        let right = extent_of_hold(holds, alpha, alpha + right_gap.min(cap), SCAN);
        let mono = |lo: T, hi: T| Branch::new(lo, hi, work.df(lo + (hi - lo) * T::lit(0.5)) > T::zero());
        if roots[k].mult % 2 == 1 {
            let lo = left.unwrap_or(alpha);
            let hi = right.unwrap_or(alpha);
            if hi > lo {
                let inc = work.df(if hi > alpha { (alpha + hi) * T::lit(0.5) } else { (alpha + lo) * T::lit(0.5) }) > T::zero();
                nodes.push(Branch::new(lo, hi, inc));
            }
        } else {
            if let Some(lo) = left {
                nodes.push(mono(lo, alpha));
            }
            if let Some(hi) = right {
                nodes.push(mono(alpha, hi));
            }
        }
    }
    if nodes.is_empty() {
        return Err(RealDynError::CutoffNotFound {
            lambda: lambda.to_f64_lossy(),
            detail: "no root neighborhood satisfies the log-derivative bound".into(),
        });
    }
    Ok(nodes)
}

/// Root neighborhoods, pruned to the strongly covering core, then shrunk to
/// the preimage of the hull of their targets.
fn generic_intervals<T: Real>(
    work: &MapFamily<T>,
    cls: &CaseClassification,
    lambda: T,
) -> Result<(Vec<Branch<T>>, (T, T)), RealDynError> {
    let nodes = root_nodes(work, cls, lambda)?;
    let tol = covering_tolerance(work.scale());
    let n = nodes.len();
    let edge: Vec<Vec<bool>> = nodes.iter().map(|s| nodes.iter().map(|t| covers(work, s, t, tol)).collect()).collect();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            let out = (0..n).any(|j| alive[j] && edge[i][j]);
            let inc = (0..n).any(|j| alive[j] && edge[j][i]);
            if !(out && inc) {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let core: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    if core.len() < 2 {
        let (a_min, bound) = cutoff_bound(work, &nodes);
        return Err(RealDynError::HypothesesNotSatisfied {
            bound,
            a_min: a_min.to_f64_lossy(),
            a: work.a.abs().to_f64_lossy(),
            detail: format!("only {} root neighborhood(s) cover one another", core.len()),
        });
    }
    let ambient = (nodes[core[0]].lo, nodes[*core.last().expect("core")].hi);
    let mut out = Vec::with_capacity(core.len());
    for &i in &core {
        let targets: Vec<&Branch<T>> = core.iter().filter(|&&j| edge[i][j]).map(|&j| &nodes[j]).collect();
        let lo = targets.iter().map(|b| b.lo).fold(T::infinity(), T::min);
        let hi = targets.iter().map(|b| b.hi).fold(T::neg_infinity(), T::max);
        let x1 = preimage_on_branch(work, &nodes[i], lo)?;
        let x2 = preimage_on_branch(work, &nodes[i], hi)?;
        out.push(Branch::new(x1.min(x2), x1.max(x2), nodes[i].increasing));
    }
    out.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite endpoints"));
    Ok((out, ambient))
}

fn cutoff_bound<T: Real>(work: &MapFamily<T>, nodes: &[Branch<T>]) -> (T, String) {
    let roots = work.g.real_roots();
    let cut: Vec<T> = nodes.iter().flat_map(|b| [b.lo, b.hi]).filter(|c| !roots.iter().any(|r| r.root == *c)).collect();
    let m0 = cut.iter().map(|&c| work.g.eval(c, T::one()).abs()).fold(T::infinity(), T::min);
    let num = cut.iter().map(|c| c.abs()).fold(T::zero(), T::max);
    (num / m0, "|a| >= max|y_i| / min|g(y_i)| over the cutoff points y_i".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::FactoredPolynomial;
    use crate::realdyn::classify;

    fn fam(lead: f64, roots: &[(f64, u32)], a: f64) -> MapFamily<f64> {
        MapFamily::new(FactoredPolynomial::with_roots(lead, roots).unwrap(), a)
    }

    #[test]
    fn logistic_intervals_closed_form() {
        let f = fam(-1.0, &[(0.0, 1), (1.0, 1)], 5.0);
        let cls = classify(&f.g, f.a, None).unwrap();
        let (s, _) = trapping_system(&f, &cls, 1.1, 0.5).unwrap();
        let r5 = 5f64.sqrt();
        assert_eq!(s.intervals[0].lo, 0.0);
        assert!((s.intervals[0].hi - (5.0 - r5) / 10.0).abs() < 1e-12);
        assert!((s.intervals[1].lo - (5.0 + r5) / 10.0).abs() < 1e-12);
        assert_eq!(s.intervals[1].hi, 1.0);
        assert_eq!(s.matrix, TransitionMatrix::full(2));
    }

    #[test]
    fn three_symbol_case() {
        let f = fam(-1.0, &[(-1.0, 2), (1.0, 1)], 50.0);
        let cls = classify(&f.g, f.a, None).unwrap();
        let (s, _) = trapping_system(&f, &cls, 1.1, 0.5).unwrap();
        assert_eq!(s.matrix.rows(), vec![vec![0, 0, 1], vec![0, 0, 1], vec![1, 1, 1]]);
        assert!(s.intervals[0].hi < -1.0 && s.intervals[1].lo > -1.0 && s.intervals[2].contains(1.0));
    }

    #[test]
    fn two_positive_roots_fixture() {
        let f = fam(1.0, &[(1.0, 1), (2.0, 1)], -20.0);
        let cls = classify(&f.g, f.a, None).unwrap();
        let (s, lm) = trapping_system(&f, &cls, 1.1, 0.5).unwrap();
        assert_eq!(s.matrix, TransitionMatrix::full(2));
        assert!(s.intervals.iter().all(|b| b.lo >= 1.0 && b.hi <= 2.0));
        let z = lm.z_a.unwrap();
        assert!((f.f(z) - z).abs() < 1e-12);
    }

    #[test]
    fn mirrored_system_maps_back() {
        let f = fam(-1.0, &[(-1.0, 1), (0.0, 1)], -5.0);
        let cls = classify(&f.g, f.a, None).unwrap();
        let (s, _) = trapping_system(&f, &cls, 1.1, 0.5).unwrap();
        assert_eq!(s.intervals[1].hi, 0.0);
        assert!(s.intervals[0].lo == -1.0);
        assert_eq!(s.matrix, TransitionMatrix::full(2));
    }

    #[test]
    fn below_threshold_is_reported() {
        let f = fam(-1.0, &[(0.0, 1), (1.0, 1)], 3.5);
        let cls = classify(&f.g, f.a, None).unwrap();
        assert!(matches!(trapping_system(&f, &cls, 1.1, 0.5), Err(RealDynError::HypothesesNotSatisfied { .. })));
    }

    #[test]
    fn preimage_examples() {
        let f = fam(-1.0, &[(0.0, 1), (1.0, 1)], 5.0);
        let left = Branch::new(0.0, 0.5, true);
        assert_eq!(preimage_on_branch(&f, &left, 0.0).unwrap(), 0.0);
        let x = preimage_on_branch(&f, &left, 1.0).unwrap();
        assert!((x - (5.0 - 5f64.sqrt()) / 10.0).abs() < 1e-15);
        let right = Branch::new(0.5, 1.0, false);
        let (a, b) = (preimage_on_branch(&f, &right, 0.2).unwrap(), preimage_on_branch(&f, &right, 0.4).unwrap());
        assert!(b < a);
        assert!(preimage_on_branch(&f, &left, 2.0).is_err());
    }
}
