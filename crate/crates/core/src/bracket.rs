//! Sign-bracketed bisection and the sampling helpers used to find brackets.
//!
//! Every landmark, cutoff and preimage in the crate is located by bisection
//! on a bracket whose endpoint values have opposite signs. Bisection is run
//! until the bracket can no longer be split in the scalar type, so results
//! carry full working precision even for roots that sit at `1e-8` next to a
//! multiple zero of the polynomial.

use thiserror::Error;

use crate::num::Real;

const MAX_BISECTIONS: usize = 2200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BracketError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("non-finite function value at x = {x}")]
    NonFinite { x: f64 },
}

/// Final bracket of a bisection run. `lo` keeps the sign of the original
/// left value, `hi` the sign of the original right value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

impl<T: Real> Bracket<T> {
    /// The endpoint with the smaller residual.
    pub fn root(&self) -> T {
        if self.f_lo.abs() <= self.f_hi.abs() {
            self.lo
        } else {
            self.hi
        }
    }

    pub fn width(&self) -> T {
        (self.hi - self.lo).abs()
    }
}

/// Bisects `f` on `[a, b]` (either order). Requires `f(a)` and `f(b)` to have
/// opposite signs or one of them to vanish.
pub fn bisect<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T) -> Result<Bracket<T>, BracketError> {
    let (mut lo, mut hi) = (a, b);
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    for (x, v) in [(lo, f_lo), (hi, f_hi)] {
        if !v.is_finite() {
            return Err(BracketError::NonFinite { x: x.to_f64_lossy() });
        }
    }
    if f_lo == T::zero() {
        return Ok(Bracket { lo, hi: lo, f_lo, f_hi: f_lo });
    }
    if f_hi == T::zero() {
        return Ok(Bracket { lo: hi, hi, f_lo: f_hi, f_hi });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(BracketError::NotBracketed {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
            f_lo: f_lo.to_f64_lossy(),
            f_hi: f_hi.to_f64_lossy(),
        });
    }
    let two = T::one() + T::one();
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + (hi - lo) / two;
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(BracketError::NonFinite { x: mid.to_f64_lossy() });
        }
        if f_mid == T::zero() {
            return Ok(Bracket { lo: mid, hi: mid, f_lo: f_mid, f_hi: f_mid });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(Bracket { lo, hi, f_lo, f_hi })
}

/// Sample points on `[lo, hi]`: `n` uniform cells plus geometric refinements
/// toward the requested endpoints, so that features at `lo + 1e-12` are seen.
pub fn sample_points<T: Real>(lo: T, hi: T, n: usize, refine_lo: bool, refine_hi: bool) -> Vec<T> {
    let n = n.max(1);
    let width = hi - lo;
    let mut pts: Vec<T> = (0..=n)
        .map(|i| lo + width * T::from_usize_lossy(i) / T::from_usize_lossy(n))
        .collect();
    let half = T::lit(0.5);
    let first_cell = width / T::from_usize_lossy(n);
    if refine_lo {
        let mut off = first_cell * half;
        while lo + off != lo && off > T::min_positive_value() {
            pts.push(lo + off);
            off = off * half;
        }
    }
    if refine_hi {
        let mut off = first_cell * half;
        while hi - off != hi && off > T::min_positive_value() {
            pts.push(hi - off);
            off = off * half;
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    pts.dedup();
    pts
}

/// Rightmost up-crossing of `h` on `[lo, hi]`: the largest root at which `h`
/// passes from `<= 0` to `> 0`. An exact zero at a sample point is returned
/// as is.
pub fn rightmost_up_crossing<T: Real, F: Fn(T) -> T>(h: F, lo: T, hi: T, n: usize) -> Option<T> {
    let pts = sample_points(lo, hi, n, true, true);
    let vals: Vec<T> = pts.iter().map(|&x| h(x)).collect();
    for i in (0..pts.len() - 1).rev() {
        if vals[i] <= T::zero() && vals[i + 1] > T::zero() {
            if vals[i] == T::zero() {
                return Some(pts[i]);
            }
            return bisect(&h, pts[i], pts[i + 1]).ok().map(|b| b.root());
        }
    }
    None
}

/// Leftmost down-crossing of `h` on `[lo, hi]`: the smallest root at which
/// `h` passes from `> 0` to `<= 0`.
pub fn leftmost_down_crossing<T: Real, F: Fn(T) -> T>(h: F, lo: T, hi: T, n: usize) -> Option<T> {
    let pts = sample_points(lo, hi, n, true, true);
    let vals: Vec<T> = pts.iter().map(|&x| h(x)).collect();
    for i in 0..pts.len() - 1 {
        if vals[i] > T::zero() && vals[i + 1] <= T::zero() {
            if vals[i + 1] == T::zero() {
                return Some(pts[i + 1]);
            }
            return bisect(&h, pts[i], pts[i + 1]).ok().map(|b| b.root());
        }
    }
    None
}

/// Walks from `start` toward `end` and returns the boundary of the initial
/// run on which `holds(x) >= 0`: the last point (to working precision) where
/// the predicate still holds. Returns `end` if it holds on every sample and
/// `None` if it fails at the first interior sample.
pub fn extent_of_hold<T: Real, F: Fn(T) -> T>(holds: F, start: T, end: T, n: usize) -> Option<T> {
    let (lo, hi) = if start < end { (start, end) } else { (end, start) };
    let mut pts = sample_points(lo, hi, n, start < end, start > end);
    if start > end {
        pts.reverse();
    }
    // Skip the start point itself (typically a root where the predicate is singular).
    let pts = &pts[1..];
    let mut prev: Option<T> = None;
    for &x in pts {
        if holds(x) >= T::zero() {
            prev = Some(x);
            continue;
        }
        let p = prev?;
        let b = bisect(&holds, p, x).ok()?;
        return Some(b.lo);
    }
    prev
}
