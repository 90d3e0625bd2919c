use serde::Serialize;

use super::RealDynError;
use crate::num::Real;
use crate::polycore::{FactoredPolynomial, MapFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NegativeCase {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum CaseContext {
    /// `α_{i0} > 0` and `a·g^{(m_{i0})}(α_{i0}) > 0`.
    TwoPositiveRoots,
    /// `α_{i0} = 0`, `f_a = a x^{d1} (b − x)^{d2} h(x)` with `a·h > 0` on `[0, b]`.
    ZeroRootForm { d1: u32, d2: u32 },
    /// `α_{i0} ≥ 0` and `a·g^{(m_{i0})}(α_{i0}) < 0`.
    NegativeLeading { case: NegativeCase, zero_root: bool },
    /// `α_{i0} < 0 < α_{i0+1}`, cases 1 through 8.
    MixedSignRoots { case: u8 },
    /// A single real root with `f_a` of one sign on the line.
    SingleRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignData {
    /// Sign of `f_a^{(m_{i0})}(α_{i0})`.
    pub left: i8,
    /// Sign of `f_a^{(m_{i0+1})}(α_{i0+1})`.
    pub right: Option<i8>,
    pub left_mult_even: bool,
}

/// The applicable construction for a family member.
///
/// When both roots of the pair are nonpositive the analysis runs on the
/// conjugate family `x ↦ −f_a(−x)`; `mirrored` is set and `work_i0` indexes
/// the pair in the mirrored polynomial. `i0` always indexes the original.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CaseClassification {
    pub context: CaseContext,
    pub i0: Option<usize>,
    pub work_i0: Option<usize>,
    pub sign_data: SignData,
    pub mirrored: bool,
}

impl CaseClassification {
    /// The family the construction operates on.
    pub fn working<T: Real>(&self, fam: &MapFamily<T>) -> MapFamily<T> {
        if self.mirrored {
            fam.mirrored()
        } else {
            fam.clone()
        }
    }
}

fn sign<T: Real>(v: T) -> i8 {
    if v > T::zero() {
        1
    } else if v < T::zero() {
        -1
    } else {
        0
    }
}

/// `h(x) = g(x) / (x^{d1} (b − x)^{d2})` for the pair `(j, j+1)` with `α_j = 0`.
pub(crate) fn zero_form_h<T: Real>(g: &FactoredPolynomial<T>, j: usize) -> FactoredPolynomial<T> {
    let c = g.cofactor(&[j, j + 1]);
    if g.real_roots()[j + 1].mult % 2 == 1 {
        let neg = FactoredPolynomial::new(-c.lead(), c.real_roots().to_vec(), c.quad_factors().to_vec());
        neg.expect("negated cofactor")
    } else {
        c
    }
}

pub fn classify<T: Real>(
    g: &FactoredPolynomial<T>,
    a: T,
    pair: Option<usize>,
) -> Result<CaseClassification, RealDynError> {
    let roots = g.real_roots();
    let r = roots.len();
    if !(a.is_finite() && a != T::zero()) {
        return Err(RealDynError::Precondition("a must be finite and nonzero".into()));
    }
    if r == 0 {
        return Err(RealDynError::NoApplicableCase("g has no real root".into()));
    }
    if r == 1 {
        if pair.is_some() {
            return Err(RealDynError::Precondition("a root pair needs two real roots".into()));
        }
        return classify_single(g, a);
    }
    let i = match pair {
        Some(i) if i + 1 < r => i,
        Some(i) => return Err(RealDynError::Precondition(format!("pair index {i} out of range for {r} roots"))),
        None => default_pair(g),
    };
    let (al, ar) = (roots[i].root, roots[i + 1].root);
    if al < T::zero() && ar > T::zero() {
        return Ok(classify_mixed(g, a, i));
    }
    let mirrored = ar <= T::zero() && al < T::zero();
    let work = if mirrored { g.mirrored() } else { g.clone() };
    let j = if mirrored { r - 2 - i } else { i };
    let wr = work.real_roots();
    let left = sign(a * work.root_leading_derivative(j));
    let right = sign(a * work.root_leading_derivative(j + 1));
    let even = wr[j].mult % 2 == 0;
    let sign_data = SignData { left, right: Some(right), left_mult_even: even };
    let zero = wr[j].root == T::zero();
    let context = if left > 0 {
        if zero {
            let h = zero_form_h(&work, j);
            let b = wr[j + 1].root;
            let positive = (0..=256).all(|k| {
                let x = b * T::from_usize_lossy(k) / T::lit(256.0);
                a * h.eval(x, T::one()) > T::zero()
            });
            if !positive {
                return Err(RealDynError::NoApplicableCase("a·h is not positive on [0, b]".into()));
            }
            CaseContext::ZeroRootForm { d1: wr[j].mult, d2: wr[j + 1].mult }
        } else {
            CaseContext::TwoPositiveRoots
        }
    } else {
        let case = match (even, right > 0) {
            (false, true) => NegativeCase::A,
            (false, false) => NegativeCase::B,
            (true, true) => NegativeCase::C,
            (true, false) => NegativeCase::D,
        };
        let covered = if zero { matches!(case, NegativeCase::A | NegativeCase::B) } else { case == NegativeCase::A };
        if !covered {
            return Err(RealDynError::NoApplicableCase(format!(
                "negative leading sign, case {case:?}, root {} is not covered",
                if zero { "at zero" } else { "positive" }
            )));
        }
        CaseContext::NegativeLeading { case, zero_root: zero }
    };
    Ok(CaseClassification { context, i0: Some(i), work_i0: Some(j), sign_data, mirrored })
}

/// First adjacent pair with a nonnegative left root, else one straddling
/// zero, else the rightmost (nonpositive) pair.
fn default_pair<T: Real>(g: &FactoredPolynomial<T>) -> usize {
    let roots = g.real_roots();
    let r = roots.len();
    if let Some(i) = (0..r - 1).find(|&i| roots[i].root >= T::zero()) {
        return i;
    }
    (0..r - 1).find(|&i| roots[i].root < T::zero() && roots[i + 1].root > T::zero()).unwrap_or(r - 2)
}

fn classify_mixed<T: Real>(g: &FactoredPolynomial<T>, a: T, i: usize) -> CaseClassification {
    let left = sign(a * g.root_leading_derivative(i));
    let right = sign(a * g.root_leading_derivative(i + 1));
    let even = g.real_roots()[i].mult % 2 == 0;
    let case = match (left > 0, right > 0, even) {
        (true, true, true) => 1,
        (true, false, true) => 2,
        (true, true, false) => 3,
        (true, false, false) => 4,
        (false, true, false) => 5,
        (false, false, false) => 6,
        (false, true, true) => 7,
        (false, false, true) => 8,
    };
    CaseClassification {
        context: CaseContext::MixedSignRoots { case },
        i0: Some(i),
        work_i0: Some(i),
        sign_data: SignData { left, right: Some(right), left_mult_even: even },
        mirrored: false,
    }
}

fn classify_single<T: Real>(g: &FactoredPolynomial<T>, a: T) -> Result<CaseClassification, RealDynError> {
    let alpha = g.real_roots()[0];
    if alpha.root == T::zero() {
        return Err(RealDynError::NoApplicableCase("single real root at zero".into()));
    }
    let mirrored = alpha.root < T::zero();
    let work = if mirrored { g.mirrored() } else { g.clone() };
    let left = sign(a * work.root_leading_derivative(0));
    let even = alpha.mult % 2 == 0;
    if !(even && left > 0) {
        return Err(RealDynError::NoApplicableCase(
            "single real root but f_a changes sign or has the wrong sign on the line".into(),
        ));
    }
    Ok(CaseClassification {
        context: CaseContext::SingleRoot,
        i0: None,
        work_i0: None,
        sign_data: SignData { left, right: None, left_mult_even: even },
        mirrored,
    })
}
