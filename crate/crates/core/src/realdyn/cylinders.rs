//! Cylinder intervals `I_w = {x : f^k(x) ∈ I_{w_k}, 0 ≤ k < |w|}`.

use rayon::prelude::*;
use serde::Serialize;

use super::system::{preimage_on_branch, Branch, IntervalSystem};
use super::RealDynError;
use crate::bracket::BracketError;
use crate::num::Real;
use crate::polycore::MapFamily;
use crate::symbolic::SymbolWord;

pub const DEFAULT_MAX_DEPTH: usize = 40;
const MAX_CYLINDERS: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cylinder<T> {
    #[serde(serialize_with = "word_string")]
    pub word: SymbolWord,
    pub lo: T,
    pub hi: T,
    /// Shorter than the floating-point resolution floor of the system.
    pub resolution_limited: bool,
}

fn word_string<S: serde::Serializer>(w: &SymbolWord, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&w.to_string())
}

impl<T: Real> Cylinder<T> {
    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> T {
        self.lo + (self.hi - self.lo) * T::lit(0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats<T> {
    pub depth: usize,
    pub count: usize,
    pub max_length: T,
    pub min_length: T,
    pub resolution_limited: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderTree<T> {
    pub depth: usize,
    /// `levels[k]` holds the cylinders of depth `k + 1` in lexicographic order.
    #[serde(skip)]
    pub levels: Vec<Vec<Cylinder<T>>>,
    pub stats: Vec<LevelStats<T>>,
}

impl<T: Real> CylinderTree<T> {
    /// Cylinders of depth `k` (`1 ≤ k ≤ depth`).
    pub fn level(&self, k: usize) -> &[Cylinder<T>] {
        &self.levels[k - 1]
    }

    pub fn deepest(&self) -> &[Cylinder<T>] {
        self.levels.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn floor<T: Real>(system: &IntervalSystem<T>) -> T {
    T::rel_tol(1e-15) * system.scale
}

fn stats<T: Real>(depth: usize, level: &[Cylinder<T>]) -> LevelStats<T> {
    LevelStats {
        depth,
        count: level.len(),
        max_length: level.iter().map(Cylinder::length).fold(T::zero(), T::max),
        min_length: level.iter().map(Cylinder::length).fold(T::infinity(), T::min),
        resolution_limited: level.iter().filter(|c| c.resolution_limited).count(),
    }
}

/// Preimage of `[lo, hi]` on a monotone branch.
fn pull_back<T: Real>(fam: &MapFamily<T>, b: &Branch<T>, lo: T, hi: T) -> Result<(T, T), RealDynError> {
    let x1 = preimage_on_branch(fam, b, lo)?;
    let x2 = preimage_on_branch(fam, b, hi)?;
    Ok((x1.min(x2), x1.max(x2)))
}

fn preimage_failure(word: &SymbolWord, e: RealDynError) -> RealDynError {
    let source = match e {
        RealDynError::NotBracketed { y, lo, hi } => BracketError::NotBracketed { lo, hi, f_lo: y, f_hi: y },
        other => return other,
    };
    RealDynError::PreimageBracketFailure { word: word.to_string(), source }
}

/// Cylinders of every allowable word of length `1..=n`, built by pulling the
/// level below back through each branch.
pub fn cylinders<T: Real>(fam: &MapFamily<T>, system: &IntervalSystem<T>, n: usize) -> Result<CylinderTree<T>, RealDynError> {
    cylinders_with_limit(fam, system, n, DEFAULT_MAX_DEPTH)
}

pub fn cylinders_with_limit<T: Real>(
    fam: &MapFamily<T>,
    system: &IntervalSystem<T>,
    n: usize,
    max_depth: usize,
) -> Result<CylinderTree<T>, RealDynError> {
    if n == 0 || n > max_depth {
        return Err(RealDynError::DepthLimit { depth: n, max: max_depth });
    }
    let total = system.matrix.count_allowable(n);
    if total > MAX_CYLINDERS {
        return Err(RealDynError::DepthLimit { depth: n, max: max_depth.min(n - 1) });
    }
    let fl = floor(system);
    let first: Vec<Cylinder<T>> = system
        .intervals
        .iter()
        .enumerate()
        .map(|(i, b)| Cylinder { word: SymbolWord(vec![i as u8]), lo: b.lo, hi: b.hi, resolution_limited: b.width() < fl })
        .collect();
    let mut levels = vec![first];
    let m = system.intervals.len();
    for _ in 1..n {
        let prev = levels.last().expect("level");
        let jobs: Vec<(usize, &Cylinder<T>)> = (0..m)
            .flat_map(|s| prev.iter().filter(move |c| system.matrix.get(s, c.word.0[0] as usize)).map(move |c| (s, c)))
            .collect();
        let next: Result<Vec<Cylinder<T>>, RealDynError> = jobs
            .par_iter()
            .map(|&(s, c)| {
                let mut word = Vec::with_capacity(c.word.len() + 1);
                word.push(s as u8);
                word.extend_from_slice(&c.word.0);
                let word = SymbolWord(word);
                let (lo, hi) = pull_back(fam, &system.intervals[s], c.lo, c.hi).map_err(|e| preimage_failure(&word, e))?;
                Ok(Cylinder { word, lo, hi, resolution_limited: hi - lo < fl })
            })
            .collect();
        levels.push(next?);
    }
    let stats = levels.iter().enumerate().map(|(k, l)| stats(k + 1, l)).collect();
    Ok(CylinderTree { depth: n, levels, stats })
}

/// The cylinder `I_w` of an allowable word.
pub fn point_from_word<T: Real>(fam: &MapFamily<T>, system: &IntervalSystem<T>, word: &SymbolWord) -> Result<(T, T), RealDynError> {
    if word.is_empty() || !system.matrix.is_allowable(word) {
        return Err(RealDynError::NotAllowable(word.to_string()));
    }
    let syms = word.symbols();
    let last = &system.intervals[*syms.last().expect("nonempty") as usize];
    let (mut lo, mut hi) = (last.lo, last.hi);
    for &s in syms[..syms.len() - 1].iter().rev() {
        (lo, hi) = pull_back(fam, &system.intervals[s as usize], lo, hi).map_err(|e| preimage_failure(word, e))?;
    }
    Ok((lo, hi))
}
