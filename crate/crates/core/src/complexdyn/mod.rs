//! Complex dynamics of `f_a(z) = a·g(z)`: critical points, critical-orbit
//! fates, the escape threshold on critical values and escape-time grids.

mod critical;
mod fate;
mod grid;

use thiserror::Error;

use crate::polycore::PolyError;

pub use critical::{critical_points, CriticalPoint, CriticalSet};
pub use fate::{
    complex_threshold, hyperbolicity_by_critical_orbits, orbit_fate, ComplexThreshold, CriticalFate, CriticalOrbitVerdict,
    OrbitFate, DEFAULT_MAX_PERIOD, MULTIPLIER_MARGIN, RETURN_TOLERANCE,
};
pub use grid::{escape_time, escape_time_grid, EscapeGrid, Window, MAX_RESOLUTION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexError {
    #[error("root solver did not converge; residuals {residuals:?}")]
    SolverNoConverge { residuals: Vec<f64> },
    #[error("resolution {width}x{height} outside 1..={max} per axis")]
    Resolution { width: usize, height: usize, max: usize },
    #[error("window [{x0}, {x1}] x [{y0}, {y1}] is empty or not finite")]
    EmptyWindow { x0: f64, x1: f64, y0: f64, y1: f64 },
    #[error("budget {budget} is outside 1..={max}")]
    Budget { budget: usize, max: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}
