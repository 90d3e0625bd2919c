//! Hyperbolicity and symbolic dynamics for the polynomial family `f_a = a·g`.

pub mod bracket;
pub mod certify;
pub mod complexdyn;
pub mod num;
pub mod polycore;
pub mod realdyn;
pub mod symbolic;

pub use certify::{certify, CertifyOptions, HyperbolicityCertificate, Strategy, Verdict};
pub use num::Real;
pub use polycore::{FactoredPolynomial, MapFamily, PolyError, PolynomialSpec};
pub use symbolic::{SequencePrefix, SymbolWord, TransitionMatrix};

pub type Polynomial = FactoredPolynomial<f64>;
pub type Family = MapFamily<f64>;
pub type Polynomial32 = FactoredPolynomial<f32>;
pub type Family32 = MapFamily<f32>;
