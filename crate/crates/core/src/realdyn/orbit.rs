use serde::Serialize;

use super::classify::{classify, CaseContext};
use super::landmarks::gap_points;
use super::system::IntervalSystem;
use super::RealDynError;
use crate::num::Real;
use crate::polycore::MapFamily;
use crate::symbolic::SymbolWord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Itinerary {
    Word(#[serde(serialize_with = "word_string")] SymbolWord),
    /// Position (1-based) of the first iterate outside every interval.
    Escape(usize),
}

fn word_string<S: serde::Serializer>(w: &SymbolWord, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&w.to_string())
}

/// Symbols of the first `n` iterates `x, f(x), …, f^{n−1}(x)`.
pub fn itinerary<T: Real>(fam: &MapFamily<T>, system: &IntervalSystem<T>, x: T, n: usize) -> Itinerary {
    let mut y = x;
    let mut word = Vec::with_capacity(n);
    for t in 0..n {
        match system.locate(y) {
            Some(k) => word.push(k as u8),
            None => return Itinerary::Escape(t + 1),
        }
        y = fam.f(y);
    }
    Itinerary::Word(SymbolWord(word))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EscapeClass {
    /// Number of steps after which the orbit lies outside `[0, b]`.
    EscapesAmbient(usize),
    /// The orbit reached `0` or the interval `(0, u_a)` where `f(x) < x`.
    ConvergesToZero(usize),
    StaysTrapped(usize),
}

/// Escape classification for the zero-root form, with the fixed point
/// `u_a` computed once.
#[derive(Debug, Clone)]
pub struct EscapeClassifier<T> {
    work: MapFamily<T>,
    mirrored: bool,
    b: T,
    u_a: Option<T>,
}

impl<T: Real> EscapeClassifier<T> {
    pub fn new(fam: &MapFamily<T>) -> Result<Self, RealDynError> {
        let cls = classify(&fam.g, fam.a, None)?;
        let CaseContext::ZeroRootForm { d1, .. } = cls.context else {
            return Err(RealDynError::Precondition(format!("requires the zero-root form, found {:?}", cls.context)));
        };
        let work = cls.working(fam);
        let j = cls.work_i0.expect("pair");
        let b = work.g.real_roots()[j + 1].root;
        let u_a = if d1 >= 2 { Some(gap_points(&work, j).map_err(RealDynError::BranchNotFound)?.p) } else { None };
        Ok(Self { work, mirrored: cls.mirrored, b, u_a })
    }

    pub fn u_a(&self) -> Option<T> {
        self.u_a
    }

    pub fn classify(&self, x: T, budget: usize) -> EscapeClass {
        let mut y = if self.mirrored { -x } else { x };
        for k in 0..=budget {
            if !(y >= T::zero() && y <= self.b) {
                return EscapeClass::EscapesAmbient(k);
            }
            if y == T::zero() || self.u_a.is_some_and(|u| y < u) {
                return EscapeClass::ConvergesToZero(k);
            }
            if k < budget {
                y = self.work.f(y);
            }
        }
        EscapeClass::StaysTrapped(budget)
    }
}

pub fn escape_classification<T: Real>(fam: &MapFamily<T>, x: T, budget: usize) -> Result<EscapeClass, RealDynError> {
    Ok(EscapeClassifier::new(fam)?.classify(x, budget))
}
