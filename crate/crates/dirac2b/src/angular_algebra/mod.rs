//! Bispinor harmonics, exact angular matrix elements, and the 8x8
//! (4x4 at `j = 0`) first-order radial system.

pub mod clebsch;
pub mod harmonics;
pub mod operators;
pub mod radial;

use thiserror::Error;

pub use clebsch::clebsch_gordan;
pub use harmonics::{build_harmonics, AngularBasis, AngularState, BasisKey, DiracBlock, HarmonicLabel, Sector};
pub use operators::{matrix_element, BasisOperators, OperatorWord, ProjectedOperators};
pub use radial::{
    build_radial_system, DiracWord, ProfileUse, RadialProfile, RadialSystem, SpinStructure, StructureKind,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngularError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported operator word `{0}`")]
    UnsupportedOperator(String),
    #[error("projection of `{word}` leaves the section span (residual {residual:e})")]
    NonClosure { word: &'static str, residual: f64 },
}
