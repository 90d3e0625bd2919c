//! Finite-depth check of `σ∘h = h∘f_a` on the cylinders of an interval system.

use rayon::prelude::*;
use serde::Serialize;

use super::SymbolWord;
use crate::bracket::bisect;
use crate::num::Real;
use crate::polycore::MapFamily;
use crate::realdyn::{itinerary, Branch, IntervalSystem, Itinerary};

const MAX_WORDS: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ViolationKind<T> {
    /// No point of the branch follows the word.
    EmptyCylinder,
    /// The midpoint of `I_w` codes to a different word.
    ItineraryMismatch { found: String },
    /// `f_a(I_w)` differs from `I_{σw}` (or misses a covered interval at depth 1).
    ImageMismatch { expected: (T, T), found: (T, T) },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation<T> {
    pub word: String,
    #[serde(flatten)]
    pub kind: ViolationKind<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiconjugacyReport<T> {
    pub depth: usize,
    pub words_checked: usize,
    pub violations: Vec<Violation<T>>,
    /// Depth-`n` cylinders are pairwise disjoint (the coding separates them).
    pub disjoint: bool,
    pub max_length: T,
    pub min_length: T,
    /// Set when the word count exceeded the enumeration cap and the check stopped early.
    pub truncated_at: Option<usize>,
}

impl<T> SemiconjugacyReport<T> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.truncated_at.is_none()
    }
}

#[derive(Clone)]
struct Cell<T> {
    word: Vec<u8>,
    span: Option<(T, T)>,
}

/// `{x ∈ branch : f_a(x) ∈ [lo, hi]}`, clamped to the part of the target the
/// branch actually reaches.
fn clamped_preimage<T: Real>(fam: &MapFamily<T>, b: &Branch<T>, lo: T, hi: T) -> Option<(T, T)> {
    let (f_lo, f_hi) = (fam.f(b.lo), fam.f(b.hi));
    let (min, max) = (f_lo.min(f_hi), f_lo.max(f_hi));
    let (lo, hi) = (lo.max(min), hi.min(max));
    if lo > hi {
        return None;
    }
    let solve = |y: T| -> T {
        if y <= min {
            if f_lo <= f_hi { b.lo } else { b.hi }
        } else if y >= max {
            if f_lo >= f_hi { b.lo } else { b.hi }
        } else {
            bisect(|x| fam.f(x) - y, b.lo, b.hi).map(|r| r.root()).unwrap_or(b.midpoint())
        }
    };
    let (x1, x2) = (solve(lo), solve(hi));
    Some((x1.min(x2), x1.max(x2)))
}

fn word_string(w: &[u8]) -> String {
    SymbolWord(w.to_vec()).to_string()
}

fn close<T: Real>(a: (T, T), b: (T, T), tol: T) -> bool {
    (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol
}

/// Checks every allowable word of length `n`:
/// the midpoint of `I_w` has itinerary `w`, and `f_a(I_w) = I_{σw}`.
pub fn verify_semiconjugacy<T: Real>(fam: &MapFamily<T>, system: &IntervalSystem<T>, n: usize) -> SemiconjugacyReport<T> {
    let n = n.max(1);
    let tol = system.covering_tolerance();
    let a = &system.matrix;
    let m = system.intervals.len();
    let mut report = SemiconjugacyReport {
        depth: n,
        words_checked: 0,
        violations: Vec::new(),
        disjoint: true,
        max_length: T::zero(),
        min_length: T::zero(),
        truncated_at: None,
    };
    for (i, b) in system.intervals.iter().enumerate() {
        let (lo, hi) = b.image(fam);
        for (j, t) in system.intervals.iter().enumerate() {
            if a.get(i, j) && !(lo <= t.lo + tol && hi >= t.hi - tol) {
                report.violations.push(Violation {
                    word: word_string(&[i as u8, j as u8]),
                    kind: ViolationKind::ImageMismatch { expected: (t.lo, t.hi), found: (lo, hi) },
                });
            }
        }
    }
    let mut level: Vec<Cell<T>> =
        system.intervals.iter().enumerate().map(|(i, b)| Cell { word: vec![i as u8], span: Some((b.lo, b.hi)) }).collect();
    for depth in 2..=n {
        if a.count_allowable(depth) > MAX_WORDS {
            report.truncated_at = Some(depth - 1);
            break;
        }
        let jobs: Vec<(usize, &Cell<T>)> =
            (0..m).flat_map(|s| level.iter().filter(move |c| a.get(s, c.word[0] as usize)).map(move |c| (s, c))).collect();
        let next: Vec<(Cell<T>, Option<Violation<T>>)> = jobs
            .par_iter()
            .map(|&(s, c)| {
                let mut word = Vec::with_capacity(c.word.len() + 1);
                word.push(s as u8);
                word.extend_from_slice(&c.word);
                let Some(target) = c.span else {
                    return (Cell { word, span: None }, None);
                };
                let span = clamped_preimage(fam, &system.intervals[s], target.0, target.1);
                let violation = match span {
                    None => Some(Violation { word: word_string(&word), kind: ViolationKind::EmptyCylinder }),
                    Some((lo, hi)) => {
                        let (y1, y2) = (fam.f(lo), fam.f(hi));
                        let found = (y1.min(y2), y1.max(y2));
                        (!close(found, target, tol)).then(|| Violation {
                            word: word_string(&word),
                            kind: ViolationKind::ImageMismatch { expected: target, found },
                        })
                    }
                };
                (Cell { word, span }, violation)
            })
            .collect();
        level = Vec::with_capacity(next.len());
        for (cell, v) in next {
            if let Some(v) = v {
                report.violations.push(v);
            }
            level.push(cell);
        }
    }
    let depth = report.truncated_at.unwrap_or(n);
    let itin: Vec<Option<Violation<T>>> = level
        .par_iter()
        .map(|c| {
            let (lo, hi) = c.span?;
            let mid = lo + (hi - lo) * T::lit(0.5);
            match itinerary(fam, system, mid, depth) {
                Itinerary::Word(w) if w.0 == c.word => None,
                Itinerary::Word(w) => Some(mismatch(&c.word, w.to_string())),
                Itinerary::Escape(k) => Some(mismatch(&c.word, format!("escape at step {k}"))),
            }
        })
        .collect();
    report.violations.extend(itin.into_iter().flatten());
    report.words_checked = level.len();
    let mut spans: Vec<(T, T)> = level.iter().filter_map(|c| c.span).collect();
    spans.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    report.disjoint = spans.windows(2).all(|w| w[0].1 < w[1].0);
    report.max_length = spans.iter().map(|s| s.1 - s.0).fold(T::zero(), T::max);
    report.min_length = spans.iter().map(|s| s.1 - s.0).fold(T::infinity(), T::min);
    if spans.is_empty() {
        report.min_length = T::zero();
    }
    report
}

fn mismatch<T>(word: &[u8], found: String) -> Violation<T> {
    Violation { word: word_string(word), kind: ViolationKind::ItineraryMismatch { found } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::FactoredPolynomial;
    use crate::realdyn::{classify, trapping_system};

    fn system(lead: f64, roots: &[(f64, u32)], a: f64) -> (MapFamily<f64>, IntervalSystem<f64>) {
        let fam = MapFamily::new(FactoredPolynomial::with_roots(lead, roots).unwrap(), a);
        let cls = classify(&fam.g, fam.a, None).unwrap();
        let (s, _) = trapping_system(&fam, &cls, 1.1, 0.5).unwrap();
        (fam, s)
    }

    #[test]
    fn logistic_depth_eight_is_clean() {
        let (fam, s) = system(-1.0, &[(0.0, 1), (1.0, 1)], 5.0);
        let r = verify_semiconjugacy(&fam, &s, 8);
        assert_eq!(r.words_checked, 256);
        assert!(r.is_clean(), "{:?}", r.violations.first());
        assert!(r.disjoint);
    }

    #[test]
    fn three_symbol_depth_six_is_clean() {
        let (fam, s) = system(-1.0, &[(-1.0, 2), (1.0, 1)], 50.0);
        assert_eq!(s.intervals.len(), 3);
        let r = verify_semiconjugacy(&fam, &s, 6);
        assert_eq!(r.words_checked as u128, s.matrix.count_allowable(6));
        assert!(r.is_clean(), "{:?}", r.violations.first());
    }

    #[test]
    fn shrunk_interval_is_detected() {
        let (fam, mut s) = system(-1.0, &[(0.0, 1), (1.0, 1)], 5.0);
        let b = s.intervals[1];
        let cut = b.width() * 0.05;
        s.intervals[1] = Branch::new(b.lo + cut, b.hi - cut, b.increasing);
        let r = verify_semiconjugacy(&fam, &s, 6);
        assert!(!r.violations.is_empty());
    }
}
