use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ComplexError;
use crate::num::Real;
use crate::polycore::{FactoredPolynomial, PolyError};

const CLUSTER: f64 = 1e-7;
const MAX_SWEEPS: usize = 2000;
const RESTARTS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint<T> {
    pub z: Complex<T>,
    pub mult: u32,
    /// `|g(z)|`.
    pub g_abs: T,
}

impl<T: Real> CriticalPoint<T> {
    pub fn is_real(&self) -> bool {
        self.z.im == T::zero()
    }
}

/// Zeros of `g'` split into `E1` (`g ≠ 0`) and `E2` (`g = 0`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet<T> {
    pub e1: Vec<CriticalPoint<T>>,
    pub e2: Vec<CriticalPoint<T>>,
    /// Largest `|g'(z)|` over the set.
    pub max_residual: T,
}

impl<T: Real> CriticalSet<T> {
    pub fn iter(&self) -> impl Iterator<Item = &CriticalPoint<T>> {
        self.e1.iter().chain(&self.e2)
    }

    /// Size counted with multiplicity.
    pub fn count(&self) -> usize {
        self.iter().map(|c| c.mult as usize).sum()
    }
}

fn mul<T: Real>(p: &[T], q: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] = out[i + j] + a * b;
        }
    }
    out
}

fn add_into<T: Real>(acc: &mut Vec<T>, p: &[T]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), T::zero());
    }
    for (a, &b) in acc.iter_mut().zip(p) {
        *a = *a + b;
    }
}

/// `h` with `g' = h · Π (x − αᵢ)^{mᵢ−1} Π qⱼ^{mⱼ−1}`, i.e. `h = G · g'/g` for
/// the squarefree part `G` of `g`.
fn deflated_derivative<T: Real>(g: &FactoredPolynomial<T>) -> Vec<T> {
    let mut factors: Vec<(Vec<T>, Vec<T>, T)> = Vec::new();
    for r in g.real_roots() {
        factors.push((vec![-r.root, T::one()], vec![T::one()], T::from_usize_lossy(r.mult as usize)));
    }
    for q in g.quad_factors() {
        factors.push((vec![q.c, q.b, T::one()], vec![q.b, T::lit(2.0)], T::from_usize_lossy(q.mult as usize)));
    }
    let mut h = vec![T::zero()];
    for (i, (_, dfac, m)) in factors.iter().enumerate() {
        let mut term: Vec<T> = dfac.iter().map(|&c| c * *m * g.lead()).collect();
        for (k, (fac, _, _)) in factors.iter().enumerate() {
            if k != i {
                term = mul(&term, fac);
            }
        }
        add_into(&mut h, &term);
    }
    while h.len() > 1 && *h.last().expect("nonempty") == T::zero() {
        h.pop();
    }
    h
}

fn horner<T: Real>(c: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let (mut p, mut dp) = (zero, zero);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn initial<T: Real>(c: &[T], rng: Option<&mut ChaCha8Rng>) -> Vec<Complex<T>> {
    let n = c.len() - 1;
    let lead = c[n].abs();
    let r = c[..n].iter().map(|a| (a.abs() / lead).to_f64_lossy()).fold(0.0, f64::max);
    let radius = (c[0].abs() / lead).to_f64_lossy().powf(1.0 / n as f64).clamp(1e-3, 1.0 + r);
    let mut jitter = rng;
    (0..n)
        .map(|k| {
            let (dr, dt) = match jitter.as_deref_mut() {
                Some(g) => (g.gen_range(0.5..1.5), g.gen_range(0.0..1.0)),
                None => (1.0, 0.0),
            };
            let t = std::f64::consts::TAU * (k as f64 + 0.25 + dt) / n as f64 + 0.4;
            let rr = radius * dr;
            Complex::new(T::lit(rr * t.cos()), T::lit(rr * t.sin()))
        })
        .collect()
}

/// Simultaneous Aberth–Ehrlich iteration; `None` when the sweep limit is hit.
fn aberth<T: Real>(c: &[T], mut z: Vec<Complex<T>>) -> Option<Vec<Complex<T>>> {
    let n = z.len();
    let eps = T::epsilon() * T::lit(8.0);
    for _ in 0..MAX_SWEEPS {
        let mut done = true;
        for k in 0..n {
            let (p, dp) = horner(c, z[k]);
            if p.norm() == T::zero() {
                continue;
            }
            let w = p / dp;
            let s = (0..n).filter(|&j| j != k).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + (z[k] - z[j]).inv());
            let delta = w / (Complex::new(T::one(), T::zero()) - w * s);
            if !(delta.re.is_finite() && delta.im.is_finite()) {
                return None;
            }
            z[k] = z[k] - delta;
            if delta.norm() > eps * (T::one() + z[k].norm()) {
                done = false;
            }
        }
        if done {
            return Some(z);
        }
    }
    None
}

fn cluster<T: Real>(mut z: Vec<Complex<T>>) -> Vec<(Complex<T>, u32)> {
    z.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    let tol = T::lit(CLUSTER);
    let mut out: Vec<(Complex<T>, u32, Complex<T>)> = Vec::new();
    for p in z {
        match out.iter_mut().find(|(c, _, _)| (*c - p).norm() <= tol * (T::one() + c.norm())) {
            Some((c, m, sum)) => {
                *sum = *sum + p;
                *m += 1;
                *c = *sum / T::from_usize_lossy(*m as usize);
            }
            None => out.push((p, 1, p)),
        }
    }
    out.into_iter()
        .map(|(c, m, _)| {
            let snap = c.im.abs() <= T::lit(CLUSTER) * (T::one() + c.re.abs());
            (if snap { Complex::new(c.re, T::zero()) } else { c }, m)
        })
        .collect()
}

fn solve<T: Real>(c: &[T]) -> Result<Vec<Complex<T>>, ComplexError> {
    let n = c.len() - 1;
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![Complex::new(-c[0] / c[1], T::zero())]),
        _ => {}
    }
    let tol = T::lit(1e-9) * (T::one() + c.iter().fold(T::zero(), |m, a| m.max(a.abs())));
    let mut last = Vec::new();
    for attempt in 0..=RESTARTS {
        let start = if attempt == 0 {
            initial(c, None)
        } else {
            initial(c, Some(&mut ChaCha8Rng::seed_from_u64(0x5eed_0000 + attempt)))
        };
        let Some(z) = aberth(c, start) else { continue };
        last = z.iter().map(|&r| horner(c, r).0.norm().to_f64_lossy()).collect();
        if z.iter().all(|&r| horner(c, r).0.norm() <= tol * (T::one() + r.norm()).powi(n as i32)) {
            return Ok(z);
        }
    }
    Err(ComplexError::SolverNoConverge { residuals: last })
}

/// Critical points of `g`. Zeros shared with `g` come exactly from the
/// factorization; the rest are roots of the deflated derivative.
pub fn critical_points<T: Real>(g: &FactoredPolynomial<T>) -> Result<CriticalSet<T>, ComplexError> {
    if g.degree() < 2 {
        return Err(PolyError::DegreeTooLow { degree: g.degree() }.into());
    }
    let mut e2 = Vec::new();
    for r in g.real_roots().iter().filter(|r| r.mult >= 2) {
        e2.push(CriticalPoint { z: Complex::new(r.root, T::zero()), mult: r.mult - 1, g_abs: T::zero() });
    }
    for q in g.quad_factors().iter().filter(|q| q.mult >= 2) {
        let re = -q.b / T::lit(2.0);
        let im = (q.c * T::lit(4.0) - q.b * q.b).sqrt() / T::lit(2.0);
        for s in [T::one(), -T::one()] {
            e2.push(CriticalPoint { z: Complex::new(re, s * im), mult: q.mult - 1, g_abs: T::zero() });
        }
    }
    let h = deflated_derivative(g);
    let g_tol = T::lit(1e-12) * (T::one() + g.coefficient_scale());
    let mut e1 = Vec::new();
    for (z, mult) in cluster(solve(&h)?) {
        let g_abs = g.eval_complex(z, T::one()).norm();
        let p = CriticalPoint { z, mult, g_abs };
        if g_abs <= g_tol {
            e2.push(p);
        } else {
            e1.push(p);
        }
    }
    let by_re = |a: &CriticalPoint<T>, b: &CriticalPoint<T>| {
        (a.z.re, a.z.im).partial_cmp(&(b.z.re, b.z.im)).unwrap_or(std::cmp::Ordering::Equal)
    };
    e1.sort_by(by_re);
    e2.sort_by(by_re);
    let max_residual = e1.iter().chain(&e2).map(|c| g.expanded_derivative_complex(c.z, 1).norm()).fold(T::zero(), T::max);
    Ok(CriticalSet { e1, e2, max_residual })
}
