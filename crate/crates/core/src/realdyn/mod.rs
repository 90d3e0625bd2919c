//! Real-line dynamics of `f_a = a·g`: case classification, landmark points,
//! trapping-interval systems, cylinder trees and itineraries.

mod classify;
mod cylinders;
mod landmarks;
mod orbit;
mod system;

use thiserror::Error;

use crate::bracket::BracketError;
use crate::polycore::PolyError;
use crate::symbolic::SymbolicError;

pub use classify::{classify, CaseClassification, CaseContext, NegativeCase, SignData};
pub use cylinders::{cylinders, cylinders_with_limit, point_from_word, Cylinder, CylinderTree, LevelStats, DEFAULT_MAX_DEPTH};
pub use landmarks::{
    boundary_derivative, compare_u_vs_bv, cutoff_divisor, derivative_cutoffs, fixed_point_curves, landmark_points,
    thresholds, turning_points, BoundaryDerivative, CurveSample, FixedPointCurves, LandmarkPoints, UvExpectation,
    Thresholds, UvOrdering,
};
pub use orbit::{escape_classification, itinerary, EscapeClass, EscapeClassifier, Itinerary};
pub use system::{preimage_on_branch, trapping_system, Branch, IntervalSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealDynError {
    #[error("no applicable case: {0}")]
    NoApplicableCase(String),
    #[error("monotone branch not found: {0}")]
    BranchNotFound(String),
    #[error("derivative cutoff not found for lambda = {lambda} ({detail})")]
    CutoffNotFound { lambda: f64, detail: String },
    #[error("bracket failure on {branch}: {source}")]
    BracketFailure { branch: String, source: BracketError },
    #[error("hypotheses not satisfied: {bound} requires |a| >= {a_min}, got |a| = {a}; {detail}")]
    HypothesesNotSatisfied { bound: String, a_min: f64, a: f64, detail: String },
    #[error("covering failed: {0}")]
    CoveringFailed(String),
    #[error("depth {depth} exceeds the limit {max}")]
    DepthLimit { depth: usize, max: usize },
    #[error("preimage bracket failure for word {word}: {source}")]
    PreimageBracketFailure { word: String, source: BracketError },
    #[error("{y} is not between the endpoint images [{lo}, {hi}]")]
    NotBracketed { y: f64, lo: f64, hi: f64 },
    #[error("word {0} is not allowable")]
    NotAllowable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// Sample count used for bracketing scans.
pub(crate) const SCAN: usize = 2048;
