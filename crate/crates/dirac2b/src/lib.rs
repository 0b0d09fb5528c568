//! Large-j pseudo-perturbative spectra for two-body Dirac equations and
//! single-channel quasipotential equations.

pub mod angular_algebra;
pub mod reduction_chain;
pub mod quasipotential_core;
pub mod coupled_solver;
pub mod meson_model;
pub mod cli;

mod numerics;
