//! Single-channel large-`ℓ` expansion around a stable circular orbit.
//!
//! A channel is anything implementing [`EffectivePotential`]: a function
//! `W(r, b, ℓ)` whose zero set with `∂W/∂r = 0` defines the orbit.

mod oscillator;
mod orbit;
mod scaling;

use thiserror::Error;

use crate::reduction_chain::ReductionError;

pub use oscillator::{epsilon, level_energies, oscillator_levels, oscillator_params, zero_order_levels, Level, OscillatorParams, Partials};
pub use orbit::{circular_orbit, circular_orbit_from, Orbit};
pub use scaling::{
    boundedness, fit_asymptotics, lambda_of, limit_partials, local_partials, normalized, AsymptoticScaling,
    FitOptions, LambdaIndex, LocalPartials, DEFAULT_FIT_LADDER, DEFAULT_LIMIT_LADDER,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuasiError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no circular orbit at index {ell}: {reason}")]
    NoOrbit { ell: u32, reason: String },
    #[error("unstable orbit at index {ell}, r={r}: d2W/dr2 = {curvature:e}")]
    Instability { ell: u32, r: f64, curvature: f64 },
    #[error("asymptotic scaling error: {0} (supply the scaling manually)")]
    Scaling(String),
    #[error("normalized potential is not bounded: max |W| {coarse:e} vs {fine:e}")]
    Normalization { coarse: f64, fine: f64 },
    #[error("regularity condition `{which}` violated: residual {residual:e}")]
    ScalingInconsistency { which: &'static str, residual: f64 },
    #[error("degenerate spectral parameter: dW/dmu vanishes")]
    Degenerate,
    #[error("orbit is unstable in the limit: omega^2 = {omega2:e}")]
    LimitInstability { omega2: f64 },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// `b(E) = E²/4 − (m₁²+m₂²)/2 + (m₁²−m₂²)²/(4E²)`.
pub fn binding_parameter(energy: f64, m1: f64, m2: f64) -> Result<f64, QuasiError> {
    if !(energy > 0.0) {
        return Err(QuasiError::Domain(format!("energy must be positive, got {energy}")));
    }
    let (s1, s2) = (m1 * m1, m2 * m2);
    let d = s1 - s2;
    Ok(energy * energy / 4.0 - (s1 + s2) / 2.0 + d * d / (4.0 * energy * energy))
}

/// Inverse of [`binding_parameter`]: `E = √(m₁²+b) + √(m₂²+b)`.
pub fn energy_from_b(b: f64, m1: f64, m2: f64) -> Result<f64, QuasiError> {
    let floor = -(m1 * m1).min(m2 * m2);
    if b < floor || !b.is_finite() {
        return Err(QuasiError::Domain(format!("binding parameter {b} below threshold {floor}")));
    }
    Ok((m1 * m1 + b).sqrt() + (m2 * m2 + b).sqrt())
}

/// A real channel function `W(r, b, ℓ)`.
pub trait EffectivePotential: Sync {
    /// `[W, ∂W/∂r, ∂²W/∂r²]`.
    fn w_jet(&self, r: f64, b: f64, ell: u32) -> Result<[f64; 3], QuasiError>;

    /// Rough `(r, b)` of the orbit, used to place the search grid.
    fn scale_hint(&self, _ell: u32) -> Option<(f64, f64)> {
        None
    }
}

impl<T: EffectivePotential + ?Sized> EffectivePotential for &T {
    fn w_jet(&self, r: f64, b: f64, ell: u32) -> Result<[f64; 3], QuasiError> {
        (**self).w_jet(r, b, ell)
    }
    fn scale_hint(&self, ell: u32) -> Option<(f64, f64)> {
        (**self).scale_hint(ell)
    }
}

/// Closure-backed potential.
pub struct FnPotential<F> {
    jet: F,
    hint: Option<fn(u32) -> (f64, f64)>,
}

impl<F> FnPotential<F>
where
    F: Fn(f64, f64, u32) -> [f64; 3] + Sync,
{
    pub fn new(jet: F) -> Self {
        FnPotential { jet, hint: None }
    }

    pub fn with_hint(mut self, hint: fn(u32) -> (f64, f64)) -> Self {
        self.hint = Some(hint);
        self
    }
}

impl<F> EffectivePotential for FnPotential<F>
where
    F: Fn(f64, f64, u32) -> [f64; 3] + Sync,
{
    fn w_jet(&self, r: f64, b: f64, ell: u32) -> Result<[f64; 3], QuasiError> {
        Ok((self.jet)(r, b, ell))
    }
    fn scale_hint(&self, ell: u32) -> Option<(f64, f64)> {
        self.hint.map(|h| h(ell))
    }
}

/// `W = U(r, E) + ℓ(ℓ+1)/r² − b(E)` for an energy-dependent quasipotential `U`.
///
/// `u` returns `[U, ∂U/∂r, ∂²U/∂r²]` at `(r, E)`.
pub struct Quasipotential<F> {
    pub m1: f64,
    pub m2: f64,
    u: F,
    hint: Option<fn(u32) -> (f64, f64)>,
}

impl<F> Quasipotential<F>
where
    F: Fn(f64, f64) -> [f64; 3] + Sync,
{
    pub fn new(m1: f64, m2: f64, u: F) -> Self {
        Quasipotential { m1, m2, u, hint: None }
    }

    pub fn with_hint(mut self, hint: fn(u32) -> (f64, f64)) -> Self {
        self.hint = Some(hint);
        self
    }

    pub fn u(&self, r: f64, energy: f64) -> [f64; 3] {
        (self.u)(r, energy)
    }
}

impl<F> EffectivePotential for Quasipotential<F>
where
    F: Fn(f64, f64) -> [f64; 3] + Sync,
{
    fn w_jet(&self, r: f64, b: f64, ell: u32) -> Result<[f64; 3], QuasiError> {
        let energy = energy_from_b(b, self.m1, self.m2)?;
        let u = (self.u)(r, energy);
        let l2 = f64::from(ell) * (f64::from(ell) + 1.0);
        Ok([
            u[0] + l2 / (r * r) - b,
            u[1] - 2.0 * l2 / (r * r * r),
            u[2] + 6.0 * l2 / (r * r * r * r),
        ])
    }
    fn scale_hint(&self, ell: u32) -> Option<(f64, f64)> {
        self.hint.map(|h| h(ell))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binding_examples() {
        assert!((binding_parameter(2.0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((energy_from_b(0.0, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let b = binding_parameter(4.0, 1.0, 2.0).unwrap();
        assert!((b - 1.640625).abs() < 1e-15);
        assert!((energy_from_b(b, 1.0, 2.0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(binding_parameter(0.0, 1.0, 1.0).is_err());
        assert!(binding_parameter(-1.0, 1.0, 1.0).is_err());
        assert!(energy_from_b(-1.5, 1.0, 2.0).is_err());
        assert!(energy_from_b(-1.0, 1.0, 2.0).is_ok());
    }
}
