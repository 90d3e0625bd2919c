use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ComplexError;
use crate::num::Real;
use crate::polycore::MapFamily;

pub const MAX_RESOLUTION: usize = 4096;
const MAX_BUDGET: usize = u16::MAX as usize;

/// Rectangle `[x0, x1] × [y0, y1]` of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn validate(&self) -> Result<(), ComplexError> {
        let ok = [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite()) && self.x0 < self.x1 && self.y0 < self.y1;
        if ok {
            Ok(())
        } else {
            Err(ComplexError::EmptyWindow { x0: self.x0, x1: self.x1, y0: self.y0, y1: self.y1 })
        }
    }
}

/// Row-major escape steps, top row first. Pixels that never leave the
/// escape disk hold `budget`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeGrid {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub budget: usize,
    pub k: f64,
    #[serde(skip)]
    pub data: Vec<u32>,
}

impl EscapeGrid {
    pub fn get(&self, col: usize, row: usize) -> u32 {
        self.data[row * self.width + col]
    }

    /// Binary PGM (P5) with maxval `budget`, two bytes per sample past 255.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        let maxval = self.budget.max(1);
        write!(out, "P5\n{} {}\n{}\n", self.width, self.height, maxval)?;
        let bytes: Vec<u8> = if maxval > 255 {
            self.data.iter().flat_map(|&v| (v as u16).to_be_bytes()).collect()
        } else {
            self.data.iter().map(|&v| v as u8).collect()
        };
        out.write_all(&bytes)
    }
}

/// First `k` with `|f^k(z)| > K`, or `budget` when none occurs.
pub fn escape_time<T: Real>(fam: &MapFamily<T>, z0: Complex<T>, budget: usize, k: T) -> u32 {
    let mut z = z0;
    for step in 0..budget {
        let r = z.norm();
        if !r.is_finite() || r > k {
            return step as u32;
        }
        z = fam.g.eval_complex(z, fam.a);
    }
    budget as u32
}

pub fn escape_time_grid<T: Real>(
    fam: &MapFamily<T>,
    window: Window,
    width: usize,
    height: usize,
    budget: usize,
) -> Result<EscapeGrid, ComplexError> {
    window.validate()?;
    if !(1..=MAX_RESOLUTION).contains(&width) || !(1..=MAX_RESOLUTION).contains(&height) {
        return Err(ComplexError::Resolution { width, height, max: MAX_RESOLUTION });
    }
    if !(1..=MAX_BUDGET).contains(&budget) {
        return Err(ComplexError::Budget { budget, max: MAX_BUDGET });
    }
    let k = fam.g.cauchy_escape_radius(fam.a)?;
    let dx = (window.x1 - window.x0) / width as f64;
    let dy = (window.y1 - window.y0) / height as f64;
    let data: Vec<u32> = (0..height)
        .into_par_iter()
        .flat_map_iter(|row| {
            let y = window.y1 - (row as f64 + 0.5) * dy;
            (0..width).map(move |col| {
                let x = window.x0 + (col as f64 + 0.5) * dx;
                escape_time(fam, Complex::new(T::lit(x), T::lit(y)), budget, k)
            })
        })
        .collect();
    Ok(EscapeGrid { window, width, height, budget, k: k.to_f64_lossy(), data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::FactoredPolynomial;

    fn logistic(a: f64) -> MapFamily<f64> {
        MapFamily::new(FactoredPolynomial::with_roots(-1.0, &[(0.0, 1), (1.0, 1)]).unwrap(), a)
    }

    #[test]
    fn outside_and_fixed_points() {
        let f = logistic(5.0);
        assert_eq!(escape_time(&f, Complex::new(3.0, 0.0), 50, 2.0), 0);
        assert_eq!(escape_time(&f, Complex::new(0.0, 0.0), 50, 2.0), 50);
        let far = Window { x0: 10.0, x1: 11.0, y0: 10.0, y1: 11.0 };
        assert!(escape_time_grid(&f, far, 8, 8, 20).unwrap().data.iter().all(|&v| v == 0));
    }

    #[test]
    fn validation_and_pgm() {
        let f = logistic(5.0);
        let w = Window { x0: -0.5, x1: 1.5, y0: -1.0, y1: 1.0 };
        assert!(escape_time_grid(&f, Window { x0: 1.0, x1: 1.0, ..w }, 4, 4, 10).is_err());
        assert!(escape_time_grid(&f, w, 5000, 4, 10).is_err());
        let g = escape_time_grid(&f, w, 4, 3, 10).unwrap();
        let mut buf = Vec::new();
        g.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n4 3\n10\n"));
        assert_eq!(buf.len(), b"P5\n4 3\n10\n".len() + 12);
        let g = escape_time_grid(&f, w, 4, 3, 300).unwrap();
        let mut buf = Vec::new();
        g.write_pgm(&mut buf).unwrap();
        assert_eq!(buf.len(), b"P5\n4 3\n300\n".len() + 24);
    }
}
