//! One-sided sequence spaces, the shift, transition matrices and subshifts
//! of finite type.
//!
//! Symbols are stored 0-based (`0..m`) and printed 1-based.

mod conjugacy;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conjugacy::{verify_semiconjugacy, SemiconjugacyReport, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("transition matrix must be square with at least 2 symbols")]
    BadShape,
    #[error("entry ({row},{col}) is {value}, expected 0 or 1")]
    NotBinary { row: usize, col: usize, value: u8 },
    #[error("row {0} has no nonzero entry")]
    EmptyRow(usize),
    #[error("column {0} has no nonzero entry")]
    EmptyColumn(usize),
    #[error("prefix lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("prefix must have at least {needed} symbols")]
    TooShort { needed: usize },
    #[error("{count} allowable words exceed the enumeration limit {limit}")]
    Overflow { count: u128, limit: u128 },
    #[error("symbol {symbol} out of range for {m} symbols")]
    SymbolOutOfRange { symbol: usize, m: usize },
}

/// Square 0-1 matrix with every row and column sum at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct TransitionMatrix {
    m: usize,
    entries: Vec<bool>,
}

impl TryFrom<Vec<Vec<u8>>> for TransitionMatrix {
    type Error = SymbolicError;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self, Self::Error> {
        Self::from_rows(&rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<u8>> {
    fn from(a: TransitionMatrix) -> Self {
        a.rows()
    }
}

impl TransitionMatrix {
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, SymbolicError> {
        let m = rows.len();
        if m < 2 || rows.iter().any(|r| r.as_ref().len() != m) {
            return Err(SymbolicError::BadShape);
        }
        let mut entries = Vec::with_capacity(m * m);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.as_ref().iter().enumerate() {
                if v > 1 {
                    return Err(SymbolicError::NotBinary { row: i, col: j, value: v });
                }
                entries.push(v == 1);
            }
        }
        let a = Self { m, entries };
        for i in 0..m {
            if !(0..m).any(|j| a.get(i, j)) {
                return Err(SymbolicError::EmptyRow(i));
            }
            if !(0..m).any(|j| a.get(j, i)) {
                return Err(SymbolicError::EmptyColumn(i));
            }
        }
        Ok(a)
    }

    pub fn full(m: usize) -> Self {
        Self { m, entries: vec![true; m * m] }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.m + j]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.m).map(|i| (0..self.m).map(|j| self.get(i, j) as u8).collect()).collect()
    }

    pub fn is_allowable(&self, word: &SymbolWord) -> bool {
        word.0.iter().all(|&s| (s as usize) < self.m) && word.0.windows(2).all(|w| self.get(w[0] as usize, w[1] as usize))
    }

    /// Number of allowable words of length `len`: `1ᵀ A^{len−1} 1`, saturating.
    pub fn count_allowable(&self, len: usize) -> u128 {
        if len == 0 {
            return 0;
        }
        let mut v = vec![1u128; self.m];
        for _ in 1..len {
            v = (0..self.m)
                .map(|i| (0..self.m).filter(|&j| self.get(i, j)).fold(0u128, |acc, j| acc.saturating_add(v[j])))
                .collect();
        }
        v.iter().fold(0u128, |acc, &x| acc.saturating_add(x))
    }

    /// Boolean matrix power `A^n` (n ≥ 1).
    pub fn bool_power(&self, n: usize) -> Vec<bool> {
        let mut acc = self.entries.clone();
        for _ in 1..n {
            acc = bool_mul(&acc, &self.entries, self.m);
        }
        acc
    }

    /// Strong connectivity of the transition graph.
    pub fn is_irreducible(&self) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.m];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(i) = queue.pop_front() {
                for j in 0..self.m {
                    let edge = if forward { self.get(i, j) } else { self.get(j, i) };
                    if edge && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Period of an irreducible matrix: gcd over edges of `level(i) + 1 − level(j)`
    /// for BFS levels from symbol 0.
    pub fn period(&self) -> Option<usize> {
        if !self.is_irreducible() {
            return None;
        }
        let mut level = vec![usize::MAX; self.m];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for j in 0..self.m {
                if self.get(i, j) && level[j] == usize::MAX {
                    level[j] = level[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        let mut g = 0usize;
        for i in 0..self.m {
            for j in 0..self.m {
                if self.get(i, j) {
                    let d = (level[i] as i64 + 1 - level[j] as i64).unsigned_abs() as usize;
                    g = gcd(g, d);
                }
            }
        }
        Some(g)
    }

    /// Wielandt's bound `(m−1)² + 1` on the primitivity exponent.
    pub fn wielandt_bound(&self) -> usize {
        (self.m - 1) * (self.m - 1) + 1
    }

    pub fn is_eventually_positive(&self) -> EventualPositivity {
        let irreducible = self.is_irreducible();
        let period = self.period();
        let primitive = irreducible && period == Some(1);
        let mut index = None;
        if primitive {
            let mut acc = self.entries.clone();
            for n in 1..=self.wielandt_bound() {
                if n > 1 {
                    acc = bool_mul(&acc, &self.entries, self.m);
                }
                if acc.iter().all(|&e| e) {
                    index = Some(n);
                    break;
                }
            }
        }
        EventualPositivity { eventually_positive: primitive && index.is_some(), index, irreducible, period }
    }

    /// All allowable words of length `len` in lexicographic order.
    pub fn enumerate_allowable(&self, len: usize, limit: u128) -> Result<Vec<SymbolWord>, SymbolicError> {
        let count = self.count_allowable(len);
        if count > limit {
            return Err(SymbolicError::Overflow { count, limit });
        }
        let mut out = Vec::with_capacity(count as usize);
        if len == 0 {
            return Ok(out);
        }
        let mut stack: Vec<u8> = Vec::with_capacity(len);
        self.extend_words(&mut stack, len, &mut out);
        Ok(out)
    }

    fn extend_words(&self, stack: &mut Vec<u8>, len: usize, out: &mut Vec<SymbolWord>) {
        if stack.len() == len {
            out.push(SymbolWord(stack.clone()));
            return;
        }
        for s in 0..self.m {
            if stack.last().map_or(true, |&p| self.get(p as usize, s)) {
                stack.push(s as u8);
                self.extend_words(stack, len, out);
                stack.pop();
            }
        }
    }
}

fn bool_mul(x: &[bool], y: &[bool], m: usize) -> Vec<bool> {
    let mut out = vec![false; m * m];
    for i in 0..m {
        for k in 0..m {
            if x[i * m + k] {
                for j in 0..m {
                    out[i * m + j] |= y[k * m + j];
                }
            }
        }
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EventualPositivity {
    pub eventually_positive: bool,
    /// Least `k` with `A^k > 0`.
    pub index: Option<usize>,
    pub irreducible: bool,
    pub period: Option<usize>,
}

/// Finite word over `{0..m}` (printed 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymbolWord(pub Vec<u8>);

impl SymbolWord {
    pub fn from_one_based(symbols: &[u8]) -> Self {
        Self(symbols.iter().map(|&s| s - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn shifted(&self) -> SymbolWord {
        SymbolWord(self.0.get(1..).unwrap_or(&[]).to_vec())
    }

    pub fn one_based(&self) -> Vec<u8> {
        self.0.iter().map(|&s| s + 1).collect()
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&s| s >= 9);
        for (i, s) in self.0.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", s + 1)?;
        }
        Ok(())
    }
}

/// Finite prefix of a one-sided sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequencePrefix(Vec<u8>);

impl SequencePrefix {
    pub fn new(symbols: Vec<u8>) -> Result<Self, SymbolicError> {
        if symbols.is_empty() {
            return Err(SymbolicError::TooShort { needed: 1 });
        }
        Ok(Self(symbols))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `σ`: drops the first symbol.
    pub fn shift(&self) -> Result<Self, SymbolicError> {
        if self.0.len() < 2 {
            return Err(SymbolicError::TooShort { needed: 2 });
        }
        Ok(Self(self.0[1..].to_vec()))
    }
}

/// Bounds on `d(α, β) = Σ δ(aᵢ, bᵢ)/2^i` from length-`L` prefixes: the
/// partial sum and the partial sum plus the tail bound `2^{1−L}`.
pub fn metric_distance(alpha: &SequencePrefix, beta: &SequencePrefix) -> Result<(f64, f64), SymbolicError> {
    if alpha.len() != beta.len() {
        return Err(SymbolicError::LengthMismatch(alpha.len(), beta.len()));
    }
    let lower = alpha
        .0
        .iter()
        .zip(&beta.0)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| 0.5f64.powi(i as i32))
        .sum::<f64>();
    let upper = lower + 2.0f64.powi(1 - alpha.len() as i32);
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> TransitionMatrix {
        TransitionMatrix::from_rows(&[[1, 1], [1, 0]]).unwrap()
    }

    fn three() -> TransitionMatrix {
        TransitionMatrix::from_rows(&[[0, 0, 1], [0, 0, 1], [1, 1, 1]]).unwrap()
    }

    #[test]
    fn eventual_positivity_examples() {
        let e = fib().is_eventually_positive();
        assert!(e.eventually_positive);
        assert_eq!(e.index, Some(2));
        assert_eq!(three().is_eventually_positive().index, Some(2));
        let id = TransitionMatrix::from_rows(&[[1, 0], [0, 1]]).unwrap();
        let e = id.is_eventually_positive();
        assert!(!e.eventually_positive && e.index.is_none());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(TransitionMatrix::full(2).enumerate_allowable(10, 1_000_000).unwrap().len(), 1024);
        assert_eq!(fib().enumerate_allowable(3, 100).unwrap().len(), 5);
        let words: Vec<_> = three().enumerate_allowable(2, 100).unwrap().iter().map(|w| w.to_string()).collect();
        assert_eq!(words, ["13", "23", "31", "32", "33"]);
        assert!(matches!(TransitionMatrix::full(2).enumerate_allowable(30, 1_000_000), Err(SymbolicError::Overflow { .. })));
    }

    #[test]
    fn invalid_matrices_rejected() {
        assert_eq!(TransitionMatrix::from_rows(&[[1, 0], [1, 0]]), Err(SymbolicError::EmptyColumn(1)));
        assert_eq!(TransitionMatrix::from_rows(&[[0, 0], [1, 1]]), Err(SymbolicError::EmptyRow(0)));
        assert!(TransitionMatrix::from_rows(&[[1]]).is_err());
        assert!(matches!(TransitionMatrix::from_rows(&[[2, 0], [0, 1]]), Err(SymbolicError::NotBinary { .. })));
    }

    #[test]
    fn metric_examples() {
        let a = SequencePrefix::new(vec![0; 20]).unwrap();
        assert_eq!(metric_distance(&a, &a).unwrap().0, 0.0);
        let mut b = vec![0; 20];
        b[0] = 1;
        let b = SequencePrefix::new(b).unwrap();
        assert_eq!(metric_distance(&a, &b).unwrap().0, 1.0);
        let c = SequencePrefix::new(vec![1; 60]).unwrap();
        let z = SequencePrefix::new(vec![0; 60]).unwrap();
        assert!((metric_distance(&c, &z).unwrap().0 - 2.0).abs() < 1e-15);
        assert!(metric_distance(&a, &c).is_err());
    }

    #[test]
    fn shift_examples() {
        let p = SequencePrefix::new(vec![0, 1, 1]).unwrap();
        assert_eq!(p.shift().unwrap().symbols(), &[1, 1]);
        assert!(SequencePrefix::new(vec![1]).unwrap().shift().is_err());
        assert!(SequencePrefix::new(vec![]).is_err());
    }

    #[test]
    fn serde_round_trip_validates() {
        let a: TransitionMatrix = serde_json_like("[[0,0,1],[0,0,1],[1,1,1]]");
        assert_eq!(a, three());
    }

    fn serde_json_like(s: &str) -> TransitionMatrix {
        let rows: Vec<Vec<u8>> = serde_json::from_str(s).unwrap();
        TransitionMatrix::try_from(rows).unwrap()
    }

    #[test]
    fn period_of_cycle() {
        let c = TransitionMatrix::from_rows(&[[0, 1], [1, 0]]).unwrap();
        assert_eq!(c.period(), Some(2));
        assert!(!c.is_eventually_positive().eventually_positive);
    }
}
