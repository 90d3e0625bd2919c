//! Real polynomials in factored form.
//!
//! `g(x) = lead · Π (x − αᵢ)^mᵢ · Π (x² + βⱼx + γⱼ)^mⱼ` with the real roots
//! strictly increasing and every quadratic factor irreducible over ℝ. The
//! factored form is authoritative; the monomial coefficients are derived
//! once at construction and cached.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{factorial, powi, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("leading coefficient must be finite and nonzero")]
    ZeroLead,
    #[error("real roots must be finite and strictly increasing (offending index {index})")]
    RootsNotIncreasing { index: usize },
    #[error("multiplicities must be at least 1")]
    ZeroMultiplicity,
    #[error("quadratic factor x^2 + {b}x + {c} has nonnegative discriminant")]
    ReducibleQuadratic { b: f64, c: f64 },
    #[error("x = {x} is within tolerance of the real root {root}")]
    RootSingularity { x: f64, root: f64 },
    #[error("degree {degree} is below 2")]
    DegreeTooLow { degree: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot<T> {
    pub root: T,
    pub mult: u32,
}

/// Irreducible factor `x² + b·x + c`, `b² − 4c < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFactor<T> {
    pub b: T,
    pub c: T,
    pub mult: u32,
}

impl<T: Real> QuadFactor<T> {
    #[inline]
    fn value(&self, x: T) -> T {
        x * x + self.b * x + self.c
    }
}

/// JSON form of a factored polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub lead: f64,
    #[serde(default)]
    pub real_roots: Vec<RootSpec>,
    #[serde(default)]
    pub quad_factors: Vec<QuadSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSpec {
    pub root: f64,
    pub mult: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub b: f64,
    pub c: f64,
    pub mult: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactoredPolynomial<T> {
    lead: T,
    real_roots: Vec<RealRoot<T>>,
    quad_factors: Vec<QuadFactor<T>>,
    coeffs: Vec<T>,
}

impl<T: Real> FactoredPolynomial<T> {
    pub fn new(
        lead: T,
        real_roots: Vec<RealRoot<T>>,
        quad_factors: Vec<QuadFactor<T>>,
    ) -> Result<Self, PolyError> {
        if !lead.is_finite() || lead == T::zero() {
            return Err(PolyError::ZeroLead);
        }
        for (i, r) in real_roots.iter().enumerate() {
            if r.mult == 0 {
                return Err(PolyError::ZeroMultiplicity);
            }
            if !r.root.is_finite() || (i > 0 && real_roots[i - 1].root >= r.root) {
                return Err(PolyError::RootsNotIncreasing { index: i });
            }
        }
        for q in &quad_factors {
            if q.mult == 0 {
                return Err(PolyError::ZeroMultiplicity);
            }
            let four = T::lit(4.0);
            if !(q.b * q.b - four * q.c < T::zero()) {
                return Err(PolyError::ReducibleQuadratic { b: q.b.to_f64_lossy(), c: q.c.to_f64_lossy() });
            }
        }
        let coeffs = expand_factors(lead, &real_roots, &quad_factors);
        Ok(Self { lead, real_roots, quad_factors, coeffs })
    }

    /// Convenience constructor from `(root, mult)` pairs without quadratic factors.
    pub fn with_roots(lead: T, roots: &[(T, u32)]) -> Result<Self, PolyError> {
        let rs = roots.iter().map(|&(root, mult)| RealRoot { root, mult }).collect();
        Self::new(lead, rs, Vec::new())
    }

    pub fn from_spec(spec: &PolynomialSpec) -> Result<Self, PolyError> {
        let rs = spec
            .real_roots
            .iter()
            .map(|r| RealRoot { root: T::lit(r.root), mult: r.mult })
            .collect();
        let qs = spec
            .quad_factors
            .iter()
            .map(|q| QuadFactor { b: T::lit(q.b), c: T::lit(q.c), mult: q.mult })
            .collect();
        Self::new(T::lit(spec.lead), rs, qs)
    }

    pub fn to_spec(&self) -> PolynomialSpec {
        PolynomialSpec {
            lead: self.lead.to_f64_lossy(),
            real_roots: self
                .real_roots
                .iter()
                .map(|r| RootSpec { root: r.root.to_f64_lossy(), mult: r.mult })
                .collect(),
            quad_factors: self
                .quad_factors
                .iter()
                .map(|q| QuadSpec { b: q.b.to_f64_lossy(), c: q.c.to_f64_lossy(), mult: q.mult })
                .collect(),
        }
    }

    pub fn lead(&self) -> T {
        self.lead
    }

    pub fn real_roots(&self) -> &[RealRoot<T>] {
        &self.real_roots
    }

    pub fn quad_factors(&self) -> &[QuadFactor<T>] {
        &self.quad_factors
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Monomial coefficients in ascending order.
    pub fn expand(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coefficient_scale(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    /// `scale · g(x)` evaluated factor by factor.
    pub fn eval(&self, x: T, scale: T) -> T {
        scale * self.eval_unscaled(x)
    }

    fn eval_unscaled(&self, x: T) -> T {
        let mut acc = self.lead;
        for r in &self.real_roots {
            acc = acc * powi(x - r.root, r.mult);
        }
        for q in &self.quad_factors {
            acc = acc * powi(q.value(x), q.mult);
        }
        acc
    }

    pub fn eval_complex(&self, z: Complex<T>, scale: T) -> Complex<T> {
        let mut acc = Complex::new(self.lead * scale, T::zero());
        for r in &self.real_roots {
            acc = acc * (z - r.root).powu(r.mult);
        }
        for q in &self.quad_factors {
            acc = acc * (z * z + z * q.b + q.c).powu(q.mult);
        }
        acc
    }

    /// `order`-th derivative at `x`. The first derivative is taken by the
    /// product rule on the factors; higher orders come from the cached
    /// expanded coefficients.
    pub fn derivative_eval(&self, x: T, order: usize) -> T {
        match order {
            0 => self.eval_unscaled(x),
            1 => self.factored_first_derivative(x),
            _ => self.expanded_derivative_eval(x, order),
        }
    }

    /// `order`-th derivative by Horner's rule on the expanded coefficients.
    pub fn expanded_derivative_eval(&self, x: T, order: usize) -> T {
        horner_derivative(&self.coeffs, x, order)
    }

    pub fn expanded_derivative_complex(&self, z: Complex<T>, order: usize) -> Complex<T> {
        let n = self.coeffs.len();
        if order >= n {
            return Complex::new(T::zero(), T::zero());
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in (order..n).rev() {
            acc = acc * z + falling::<T>(i, order) * self.coeffs[i];
        }
        acc
    }

    fn factored_first_derivative(&self, x: T) -> T {
        // values v_k = F_k^{m_k} and derivatives d_k = m_k F_k^{m_k-1} F_k'
        let mut vals = Vec::with_capacity(self.real_roots.len() + self.quad_factors.len());
        let mut ders = Vec::with_capacity(vals.capacity());
        for r in &self.real_roots {
            let t = x - r.root;
            vals.push(powi(t, r.mult));
            ders.push(T::from_usize_lossy(r.mult as usize) * powi(t, r.mult - 1));
        }
        for q in &self.quad_factors {
            let t = q.value(x);
            let dt = x + x + q.b;
            vals.push(powi(t, q.mult));
            ders.push(T::from_usize_lossy(q.mult as usize) * powi(t, q.mult - 1) * dt);
        }
        let k = vals.len();
        let mut prefix = vec![T::one(); k + 1];
        for i in 0..k {
            prefix[i + 1] = prefix[i] * vals[i];
        }
        let mut suffix = T::one();
        let mut sum = T::zero();
        for i in (0..k).rev() {
            sum = sum + ders[i] * prefix[i] * suffix;
            suffix = suffix * vals[i];
        }
        self.lead * sum
    }

    /// Tolerance inside which `x` counts as sitting on the real root `α`.
    pub fn root_tolerance(alpha: T) -> T {
        T::rel_tol(1e-12) * (T::one() + alpha.abs())
    }

    /// `g'(x)/g(x)` as the partial-fraction sum over the factors.
    pub fn log_derivative(&self, x: T) -> Result<T, PolyError> {
        let mut sum = T::zero();
        for r in &self.real_roots {
            let t = x - r.root;
            if t.abs() < Self::root_tolerance(r.root) {
                return Err(PolyError::RootSingularity { x: x.to_f64_lossy(), root: r.root.to_f64_lossy() });
            }
            sum = sum + T::from_usize_lossy(r.mult as usize) / t;
        }
        for q in &self.quad_factors {
            sum = sum + T::from_usize_lossy(q.mult as usize) * (x + x + q.b) / q.value(x);
        }
        Ok(sum)
    }

    /// `g^{(mᵢ)}(αᵢ) = mᵢ! · lead · Π_{j≠i}(αᵢ − αⱼ)^{mⱼ} · Π quad(αᵢ)^{m}`:
    /// the first nonvanishing derivative at the `i`-th real root, computed
    /// exactly from the factors.
    pub fn root_leading_derivative(&self, i: usize) -> T {
        let ri = self.real_roots[i];
        let mut acc = factorial::<T>(ri.mult as usize) * self.lead;
        for (j, r) in self.real_roots.iter().enumerate() {
            if j != i {
                acc = acc * powi(ri.root - r.root, r.mult);
            }
        }
        for q in &self.quad_factors {
            acc = acc * powi(q.value(ri.root), q.mult);
        }
        acc
    }

    /// The polynomial with the listed real roots removed (same leading coefficient).
    pub fn cofactor(&self, excluded: &[usize]) -> Self {
        let rs = self
            .real_roots
            .iter()
            .enumerate()
            .filter(|(i, _)| !excluded.contains(i))
            .map(|(_, r)| *r)
            .collect();
        Self::new(self.lead, rs, self.quad_factors.clone()).expect("cofactor of a valid polynomial")
    }

    /// The conjugate `x ↦ −g(−x)` of the map under the reflection `x ↦ −x`.
    /// Roots are negated, quadratic factors get `b ↦ −b`, and the sign
    /// `(−1)^{deg+1}` is absorbed into the leading coefficient.
    pub fn mirrored(&self) -> Self {
        let sign = if self.degree() % 2 == 0 { -T::one() } else { T::one() };
        let rs = self
            .real_roots
            .iter()
            .rev()
            .map(|r| RealRoot { root: -r.root, mult: r.mult })
            .collect();
        let qs = self.quad_factors.iter().map(|q| QuadFactor { b: -q.b, c: q.c, mult: q.mult }).collect();
        Self::new(sign * self.lead, rs, qs).expect("mirror of a valid polynomial")
    }

    /// Radius `K ≥ 1` with `|a·g(z)| ≥ |z|` on `|z| = K` and strictly beyond.
    ///
    /// For `|z| = R ≥ 1`, `|a g(z)| ≥ |a| R^{n−1} (|lead| R − S)` with
    /// `S = Σ_{i<n} |cᵢ|`, which exceeds `R` once `|lead| R − S ≥ 1/|a|`
    /// (`n ≥ 2`). For `|a| ≥ 1` this is the `a`-independent
    /// `K = max(1, (S + 1)/|lead|)`.
    pub fn cauchy_escape_radius(&self, a: T) -> Result<T, PolyError> {
        let n = self.degree();
        if n < 2 {
            return Err(PolyError::DegreeTooLow { degree: n });
        }
        let s = self.coeffs[..n].iter().fold(T::zero(), |acc, c| acc + c.abs());
        let inv_a = T::one() / a.abs().min(T::one());
        Ok(T::one().max((s + inv_a) / self.lead.abs()))
    }
}

pub(crate) fn falling<T: Real>(i: usize, order: usize) -> T {
    ((i - order + 1)..=i).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k))
}

pub(crate) fn horner_derivative<T: Real>(coeffs: &[T], x: T, order: usize) -> T {
    let n = coeffs.len();
    if order >= n {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in (order..n).rev() {
        acc = acc * x + falling::<T>(i, order) * coeffs[i];
    }
    acc
}

fn mul_poly<T: Real>(p: &[T], q: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] = out[i + j] + a * b;
        }
    }
    out
}

fn expand_factors<T: Real>(lead: T, roots: &[RealRoot<T>], quads: &[QuadFactor<T>]) -> Vec<T> {
    let mut acc = vec![lead];
    for r in roots {
        for _ in 0..r.mult {
            acc = mul_poly(&acc, &[-r.root, T::one()]);
        }
    }
    for q in quads {
        for _ in 0..q.mult {
            acc = mul_poly(&acc, &[q.c, q.b, T::one()]);
        }
    }
    acc
}

/// One-parameter family member `f_a(x) = a·g(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFamily<T> {
    pub g: FactoredPolynomial<T>,
    pub a: T,
}

impl<T: Real> MapFamily<T> {
    pub fn new(g: FactoredPolynomial<T>, a: T) -> Self {
        Self { g, a }
    }

    #[inline]
    pub fn f(&self, x: T) -> T {
        self.g.eval(x, self.a)
    }

    #[inline]
    pub fn df(&self, x: T) -> T {
        self.a * self.g.derivative_eval(x, 1)
    }

    #[inline]
    pub fn d2f(&self, x: T) -> T {
        self.a * self.g.derivative_eval(x, 2)
    }

    pub fn iterate(&self, x: T, n: usize) -> T {
        (0..n).fold(x, |y, _| self.f(y))
    }

    /// Conjugate family under `x ↦ −x`.
    pub fn mirrored(&self) -> Self {
        Self { g: self.g.mirrored(), a: self.a }
    }

    /// Characteristic length of the real-root configuration.
    pub fn scale(&self) -> T {
        let roots = self.g.real_roots();
        let span = match (roots.first(), roots.last()) {
            (Some(f), Some(l)) => (l.root - f.root).abs().max(l.root.abs()).max(f.root.abs()),
            _ => T::one(),
        };
        span.max(T::one())
    }
}
