use rayon::prelude::*;

use super::orbit::Orbit;
use super::scaling::{lambda_of, limit_partials, orbit_ladder, AsymptoticScaling, LocalPartials};
use super::{energy_from_b, EffectivePotential, QuasiError};
use crate::numerics::polyfit;

const ZERO_ORDER_TOL: f64 = 1e-8;
const FIRST_ORDER_TOL: f64 = 1e-6;

/// Partials of `W̄` at `(ρ, μ, λ) = (1, 1, 0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Partials {
    pub w: f64,
    pub w_rho: f64,
    pub w_mu: f64,
    pub w_rhorho: f64,
    pub w_mumu: f64,
    pub w_rhomu: f64,
    pub w_lambda: f64,
    pub w_lambdalambda: f64,
    pub w_rholambda: f64,
    pub w_mulambda: f64,
}

impl Partials {
    /// From the `λ^0`, `λ^1`, `λ^2` coefficients of the local partials.
    pub fn from_limits(c: &[LocalPartials]) -> Self {
        let c2 = c.get(2).copied().unwrap_or_default();
        Partials {
            w: c[0].f,
            w_rho: c[0].f_r,
            w_mu: c[0].f_m,
            w_rhorho: c[0].f_rr,
            w_mumu: c[0].f_mm,
            w_rhomu: c[0].f_rm,
            w_lambda: c[1].f,
            w_lambdalambda: 2.0 * c2.f,
            w_rholambda: c[1].f_r,
            w_mulambda: c[1].f_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub kappa: f64,
    pub omega2: f64,
    pub nu: f64,
    pub rho1: f64,
    pub mu1: f64,
    pub partials: Partials,
    /// `max(|W̄⁰|, |∂W̄⁰/∂ρ|)`.
    pub residual_zero: f64,
    /// First-order conditions evaluated with orbit-fitted `ρ⁽¹⁾, μ⁽¹⁾`.
    pub residual_mu: f64,
    pub residual_rho: f64,
}

impl OscillatorParams {
    pub fn omega(&self) -> f64 {
        self.omega2.sqrt()
    }

    /// Closed-form parameters from the partials; residuals left at zero.
    pub fn from_partials(p: Partials) -> Result<Self, QuasiError> {
        if p.w_mu == 0.0 || !p.w_mu.is_finite() {
            return Err(QuasiError::Degenerate);
        }
        let kappa = -p.w_mu;
        let omega2 = 0.5 * p.w_rhorho;
        if !(omega2 > 0.0) {
            return Err(QuasiError::LimitInstability { omega2 });
        }
        let mu1 = -p.w_lambda / p.w_mu;
        let rho1 = -(p.w_rhomu * mu1 + p.w_rholambda) / p.w_rhorho;
        let nu = -0.5 * p.w_rhorho * rho1 * rho1
            + 0.5 * p.w_mumu * mu1 * mu1
            + 0.5 * p.w_lambdalambda
            + p.w_mulambda * mu1;
        Ok(OscillatorParams {
            kappa,
            omega2,
            nu,
            rho1,
            mu1,
            partials: p,
            residual_zero: p.w.abs().max(p.w_rho.abs()),
            residual_mu: 0.0,
            residual_rho: 0.0,
        })
    }
}

/// Oscillator parameters of `W̄` under `scaling`, with all regularity checks.
pub fn oscillator_params<P: EffectivePotential + ?Sized>(
    pot: &P,
    scaling: &AsymptoticScaling,
    ladder: &[u32],
) -> Result<OscillatorParams, QuasiError> {
    let limits = limit_partials(pot, scaling, 1.0, 1.0, ladder)?;
    let partials = Partials::from_limits(&limits);
    let residual_zero = partials.w.abs().max(partials.w_rho.abs());
    if residual_zero > ZERO_ORDER_TOL {
        return Err(QuasiError::ScalingInconsistency { which: "zero order", residual: residual_zero });
    }
    let mut params = OscillatorParams::from_partials(partials)?;
    let (rho1, mu1) = orbit_shift(pot, scaling, ladder)?;
    params.residual_mu = (partials.w_mu * mu1 + partials.w_lambda).abs();
    params.residual_rho = (partials.w_rhorho * rho1 + partials.w_rhomu * mu1 + partials.w_rholambda).abs();
    if params.residual_mu > FIRST_ORDER_TOL {
        return Err(QuasiError::ScalingInconsistency { which: "first order (mu)", residual: params.residual_mu });
    }
    if params.residual_rho > FIRST_ORDER_TOL {
        return Err(QuasiError::ScalingInconsistency { which: "first order (rho)", residual: params.residual_rho });
    }
    Ok(params)
}

/// `λ` coefficients of `r_c/r∞` and `b_c/b∞` from solved orbits.
pub(crate) fn orbit_shift<P: EffectivePotential + ?Sized>(
    pot: &P,
    scaling: &AsymptoticScaling,
    ladder: &[u32],
) -> Result<(f64, f64), QuasiError> {
    let orbits: Vec<Orbit> = orbit_ladder(pot, ladder, {
        let l = lambda_of(ladder[0]);
        Some((scaling.r_inf(l), scaling.b_inf(l)))
    })?;
    let lams: Vec<f64> = ladder.iter().map(|&l| lambda_of(l)).collect();
    let rho: Vec<f64> = orbits.iter().zip(&lams).map(|(o, &l)| o.r / scaling.r_inf(l)).collect();
    let mu: Vec<f64> = orbits.iter().zip(&lams).map(|(o, &l)| o.b / scaling.b_inf(l)).collect();
    let deg = 4.min(ladder.len() - 2);
    Ok((polyfit(&lams, &rho, deg)[1], polyfit(&lams, &mu, deg)[1]))
}

/// `ε = [ω(2n_r + 1) + ν]/κ`.
pub fn epsilon(n_r: u32, omega: f64, nu: f64, kappa: f64) -> f64 {
    (omega * f64::from(2 * n_r + 1) + nu) / kappa
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub ell: u32,
    pub n_r: u32,
    pub epsilon: f64,
    pub b: f64,
}

/// Zero-order levels `b = b∞(λ)[1 + λμ⁽¹⁾ + λ²ε]` for `n_r = 0..=n_r_max`.
pub fn zero_order_levels(
    params: &OscillatorParams,
    scaling: &AsymptoticScaling,
    n_r_max: u32,
    ell: u32,
) -> Vec<Level> {
    oscillator_levels(params.kappa, params.omega(), params.nu, params.mu1, scaling, n_r_max, ell)
}

pub fn oscillator_levels(
    kappa: f64,
    omega: f64,
    nu: f64,
    mu1: f64,
    scaling: &AsymptoticScaling,
    n_r_max: u32,
    ell: u32,
) -> Vec<Level> {
    let lam = lambda_of(ell);
    let b_inf = scaling.b_inf(lam);
    (0..=n_r_max)
        .map(|n_r| {
            let eps = epsilon(n_r, omega, nu, kappa);
            Level { ell, n_r, epsilon: eps, b: b_inf * (1.0 + lam * mu1 + lam * lam * eps) }
        })
        .collect()
}

/// Energies of `levels`; each entry fails independently below threshold.
pub fn level_energies(levels: &[Level], m1: f64, m2: f64) -> Vec<Result<f64, QuasiError>> {
    levels.par_iter().map(|l| energy_from_b(l.b, m1, m2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasipotential_core::{fit_asymptotics, FitOptions, FnPotential, DEFAULT_LIMIT_LADDER};

    fn oscillator() -> FnPotential<impl Fn(f64, f64, u32) -> [f64; 3] + Sync> {
        FnPotential::new(|r: f64, b: f64, ell: u32| {
            let l2 = f64::from(ell) * f64::from(ell + 1);
            [r * r + l2 / (r * r) - b, 2.0 * r - 2.0 * l2 / r.powi(3), 2.0 + 6.0 * l2 / r.powi(4)]
        })
        .with_hint(|l| (f64::from(l).sqrt(), 2.0 * f64::from(l)))
    }

    #[test]
    fn oscillator_constants() {
        let pot = oscillator();
        let s = fit_asymptotics(&pot, &FitOptions::default()).unwrap();
        let p = oscillator_params(&pot, &s, &DEFAULT_LIMIT_LADDER).unwrap();
        assert!((p.kappa - 2.0).abs() < 1e-8, "{p:?}");
        assert!((p.omega2 - 4.0).abs() < 1e-8);
        assert!((p.nu - 1.0).abs() < 1e-6);
        assert!(p.mu1.abs() < 1e-6 && p.rho1.abs() < 1e-6);
        for ell in [50u32, 100, 400] {
            for lv in zero_order_levels(&p, &s, 3, ell) {
                let exact = 2.0 * (f64::from(2 * lv.n_r + ell) + 1.5);
                assert!((lv.b - exact).abs() / exact < 1e-6);
            }
        }
    }

    #[test]
    fn spacing_is_uniform() {
        let p = OscillatorParams::from_partials(Partials {
            w_mu: -1.5,
            w_rhorho: 6.0,
            w_lambdalambda: 0.4,
            ..Default::default()
        })
        .unwrap();
        let e: Vec<f64> = (0..5).map(|n| epsilon(n, p.omega(), p.nu, p.kappa)).collect();
        for w in e.windows(2) {
            assert!((w[1] - w[0] - 2.0 * p.omega() / p.kappa).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_and_unstable() {
        assert_eq!(
            OscillatorParams::from_partials(Partials { w_rhorho: 1.0, ..Default::default() }),
            Err(QuasiError::Degenerate)
        );
        assert!(matches!(
            OscillatorParams::from_partials(Partials { w_mu: -1.0, w_rhorho: -1.0, ..Default::default() }),
            Err(QuasiError::LimitInstability { .. })
        ));
    }
}
