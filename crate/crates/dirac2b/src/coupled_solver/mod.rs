//! Two-channel zero-order spectra: case classification from the channel
//! asymptotics, independent branches for cases 1 and 2, and the coupled
//! oscillator of case 3.

use nalgebra::Matrix2;
use thiserror::Error;

use crate::numerics::polyfit;
use crate::quasipotential_core::{
    fit_asymptotics, lambda_of, oscillator_levels, oscillator_params, AsymptoticScaling, EffectivePotential,
    FitOptions, Level, OscillatorParams, QuasiError, DEFAULT_LIMIT_LADDER,
};

/// Ladder used to measure the order of the orbit difference.
pub const ORDER_LADDER: [u32; 3] = [64, 256, 1024];

/// Relative tolerance for "same scaling".
pub const SCALING_TOL: f64 = 1e-6;

/// Relative tolerance on `κ` and `ω²` agreement in case 3.
pub const CASE3_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoupledError {
    #[error("channel {channel}: {source}")]
    Channel { channel: usize, source: QuasiError },
    #[error("coupling: {0}")]
    Coupling(QuasiError),
    #[error("ambiguous coupling order {order:.3} (between case 2 and case 3)")]
    Ambiguous { order: f64 },
    #[error("channels disagree in {what}: {first} vs {second}")]
    NotDegenerate { what: &'static str, first: f64, second: f64 },
    #[error("operation needs {expected}, got {found:?}")]
    WrongCase { expected: &'static str, found: CouplingCase },
}

/// Symmetric 2x2 channel matrix `[[W₁, Y], [Y, W₂]]` and its `r` derivatives.
pub trait ChannelSource: Sync {
    fn matrix_jet(&self, r: f64, b: f64, index: u32) -> Result<[Matrix2<f64>; 3], QuasiError>;

    fn scale_hint(&self, _index: u32) -> Option<(f64, f64)> {
        None
    }
}

/// One diagonal entry of a [`ChannelSource`] as a single-channel potential.
pub struct ChannelView<'a, S: ?Sized> {
    pub source: &'a S,
    pub channel: usize,
}

impl<S: ChannelSource + ?Sized> EffectivePotential for ChannelView<'_, S> {
    fn w_jet(&self, r: f64, b: f64, ell: u32) -> Result<[f64; 3], QuasiError> {
        let m = self.source.matrix_jet(r, b, ell)?;
        let c = self.channel;
        Ok([m[0][(c, c)], m[1][(c, c)], m[2][(c, c)]])
    }
    fn scale_hint(&self, ell: u32) -> Option<(f64, f64)> {
        self.source.scale_hint(ell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingCase {
    /// Different asymptotics.
    Case1,
    /// Same asymptotics, orbits differ at first order in `λ`.
    Case2,
    /// Orbits differ at second order or coincide.
    Case3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingClass {
    pub case: CouplingCase,
    pub scalings: [AsymptoticScaling; 2],
    /// Fitted order in `λ` of `|r₂ − r₁|/r₁`; infinite for coinciding orbits, `None` in case 1.
    pub rho_order: Option<f64>,
    pub mu_order: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub fit: FitOptions,
    pub order_ladder: Vec<u32>,
    pub limit_ladder: Vec<u32>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            fit: FitOptions::default(),
            order_ladder: ORDER_LADDER.to_vec(),
            limit_ladder: DEFAULT_LIMIT_LADDER.to_vec(),
        }
    }
}

fn channel_err(channel: usize) -> impl Fn(QuasiError) -> CoupledError {
    move |source| CoupledError::Channel { channel, source }
}

/// Log-log slope of `diffs` against `λ`; infinite if every difference vanishes.
fn difference_order(ladder: &[u32], diffs: &[f64]) -> f64 {
    if diffs.iter().all(|d| *d <= 1e-13) {
        return f64::INFINITY;
    }
    let xs: Vec<f64> = ladder.iter().map(|&l| lambda_of(l).ln()).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| d.max(1e-300).ln()).collect();
    polyfit(&xs, &ys, 1)[1]
}

pub fn classify_coupling<S: ChannelSource + ?Sized>(
    src: &S,
    opts: &SolverOptions,
) -> Result<CouplingClass, CoupledError> {
    let v0 = ChannelView { source: src, channel: 0 };
    let v1 = ChannelView { source: src, channel: 1 };
    let (s0, s1) = rayon::join(|| fit_asymptotics(&v0, &opts.fit), || fit_asymptotics(&v1, &opts.fit));
    let s0 = s0.map_err(channel_err(0))?;
    let s1 = s1.map_err(channel_err(1))?;
    if !s0.matches(&s1, SCALING_TOL) {
        return Ok(CouplingClass { case: CouplingCase::Case1, scalings: [s0, s1], rho_order: None, mu_order: None });
    }
    let orbits = |v: &ChannelView<'_, S>, s: &AsymptoticScaling, ch: usize| {
        opts.order_ladder
            .iter()
            .map(|&l| {
                let lam = lambda_of(l);
                crate::quasipotential_core::circular_orbit_from(v, l, (s.r_inf(lam), s.b_inf(lam)))
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(channel_err(ch))
    };
    let o0 = orbits(&v0, &s0, 0)?;
    let o1 = orbits(&v1, &s1, 1)?;
    let dr: Vec<f64> = o0.iter().zip(&o1).map(|(a, b)| (b.r - a.r).abs() / a.r).collect();
    let db: Vec<f64> = o0.iter().zip(&o1).map(|(a, b)| (b.b - a.b).abs() / a.b.abs()).collect();
    let rho_order = difference_order(&opts.order_ladder, &dr);
    let mu_order = difference_order(&opts.order_ladder, &db);
    let case = if rho_order >= 1.75 {
        CouplingCase::Case3
    } else if (0.75..1.25).contains(&rho_order) {
        CouplingCase::Case2
    } else {
        return Err(CoupledError::Ambiguous { order: rho_order });
    };
    Ok(CouplingClass { case, scalings: [s0, s1], rho_order: Some(rho_order), mu_order: Some(mu_order) })
}

/// One zero-order level family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub scaling: AsymptoticScaling,
    pub kappa: f64,
    pub omega2: f64,
    pub nu: f64,
    pub mu1: f64,
    /// Channel content of the family; a unit vector for decoupled branches.
    pub mixing: [f64; 2],
}

impl Branch {
    pub fn levels(&self, index: u32, n_r_max: u32) -> Vec<Level> {
        oscillator_levels(self.kappa, self.omega2.sqrt(), self.nu, self.mu1, &self.scaling, n_r_max, index)
    }
}

/// Branch of one diagonal channel with the coupling dropped (cases 1 and 2).
pub fn solve_decoupled<S: ChannelSource + ?Sized>(
    src: &S,
    class: &CouplingClass,
    channel: usize,
    opts: &SolverOptions,
) -> Result<(Branch, OscillatorParams), CoupledError> {
    if class.case == CouplingCase::Case3 {
        return Err(CoupledError::WrongCase { expected: "case 1 or case 2", found: class.case });
    }
    channel_branch(src, &class.scalings[channel], channel, opts)
}

/// Branch of one diagonal channel under its own scaling, ignoring the other channel.
pub fn channel_branch<S: ChannelSource + ?Sized>(
    src: &S,
    scaling: &AsymptoticScaling,
    channel: usize,
    opts: &SolverOptions,
) -> Result<(Branch, OscillatorParams), CoupledError> {
    let view = ChannelView { source: src, channel };
    let p = oscillator_params(&view, scaling, &opts.limit_ladder).map_err(channel_err(channel))?;
    let mut mixing = [0.0; 2];
    mixing[channel] = 1.0;
    Ok((Branch { scaling: *scaling, kappa: p.kappa, omega2: p.omega2, nu: p.nu, mu1: p.mu1, mixing }, p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledOscillator {
    pub scaling: AsymptoticScaling,
    pub kappa: f64,
    pub omega2: f64,
    pub nu: [f64; 2],
    pub chi: f64,
    /// Eigenvalues of `[[ν₁, χ], [χ, ν₂]]`, larger first.
    pub nu_tilde: [f64; 2],
    pub mixing: [[f64; 2]; 2],
    pub mu1: f64,
    pub channel_params: [OscillatorParams; 2],
}

impl CoupledOscillator {
    pub fn branches(&self) -> [Branch; 2] {
        [0, 1].map(|i| Branch {
            scaling: self.scaling,
            kappa: self.kappa,
            omega2: self.omega2,
            nu: self.nu_tilde[i],
            mu1: self.mu1,
            mixing: self.mixing[i],
        })
    }
}

/// Eigenpairs of `[[ν₁, χ], [χ, ν₂]]`, larger eigenvalue first.
pub fn diagonalize(nu1: f64, nu2: f64, chi: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mean = 0.5 * (nu1 + nu2);
    let half = 0.5 * (nu1 - nu2).hypot(2.0 * chi);
    let vals = [mean + half, mean - half];
    if chi == 0.0 {
        return if nu1 >= nu2 { (vals, [[1.0, 0.0], [0.0, 1.0]]) } else { (vals, [[0.0, 1.0], [1.0, 0.0]]) };
    }
    let vec_for = |e: f64| {
        // rows of (M − e) are orthogonal to the eigenvector; use the better conditioned one
        let (x, y) = if (nu1 - e).abs() >= (nu2 - e).abs() { (chi, e - nu1) } else { (e - nu2, chi) };
        let n = x.hypot(y);
        let (x, y) = (x / n, y / n);
        if x < 0.0 || (x == 0.0 && y < 0.0) {
            [-x, -y]
        } else {
            [x, y]
        }
    };
    (vals, [vec_for(vals[0]), vec_for(vals[1])])
}

/// `χ = lim λ² r∞² Y(r∞, b∞)`.
pub fn coupling_limit<S: ChannelSource + ?Sized>(
    src: &S,
    scaling: &AsymptoticScaling,
    ladder: &[u32],
) -> Result<f64, QuasiError> {
    use rayon::prelude::*;
    let ys: Vec<f64> = ladder
        .par_iter()
        .map(|&l| {
            let lam = lambda_of(l);
            let r = scaling.r_inf(lam);
            let m = src.matrix_jet(r, scaling.b_inf(lam), l)?;
            Ok(lam * lam * r * r * m[0][(0, 1)])
        })
        .collect::<Result<_, QuasiError>>()?;
    let lams: Vec<f64> = ladder.iter().map(|&l| lambda_of(l)).collect();
    Ok(polyfit(&lams, &ys, 4.min(ladder.len() - 2))[0])
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn solve_coupled<S: ChannelSource + ?Sized>(
    src: &S,
    class: &CouplingClass,
    opts: &SolverOptions,
) -> Result<CoupledOscillator, CoupledError> {
    if class.case != CouplingCase::Case3 {
        return Err(CoupledError::WrongCase { expected: "case 3", found: class.case });
    }
    let [a, b] = class.scalings;
    let common = AsymptoticScaling { c_r: 0.5 * (a.c_r + b.c_r), c_b: 0.5 * (a.c_b + b.c_b), ..a };
    let v0 = ChannelView { source: src, channel: 0 };
    let v1 = ChannelView { source: src, channel: 1 };
    let (p0, p1) = rayon::join(
        || oscillator_params(&v0, &common, &opts.limit_ladder),
        || oscillator_params(&v1, &common, &opts.limit_ladder),
    );
    let p0 = p0.map_err(channel_err(0))?;
    let p1 = p1.map_err(channel_err(1))?;
    if rel_diff(p0.kappa, p1.kappa) > CASE3_TOL {
        return Err(CoupledError::NotDegenerate { what: "kappa", first: p0.kappa, second: p1.kappa });
    }
    if rel_diff(p0.omega2, p1.omega2) > CASE3_TOL {
        return Err(CoupledError::NotDegenerate { what: "omega^2", first: p0.omega2, second: p1.omega2 });
    }
    let chi = coupling_limit(src, &common, &opts.limit_ladder).map_err(CoupledError::Coupling)?;
    let (nu_tilde, mixing) = diagonalize(p0.nu, p1.nu, chi);
    Ok(CoupledOscillator {
        scaling: common,
        kappa: 0.5 * (p0.kappa + p1.kappa),
        omega2: 0.5 * (p0.omega2 + p1.omega2),
        nu: [p0.nu, p1.nu],
        chi,
        nu_tilde,
        mixing,
        mu1: 0.5 * (p0.mu1 + p1.mu1),
        channel_params: [p0, p1],
    })
}

/// Both zero-order branches for whatever case `class` is.
pub fn solve<S: ChannelSource + ?Sized>(
    src: &S,
    class: &CouplingClass,
    opts: &SolverOptions,
) -> Result<[Branch; 2], CoupledError> {
    match class.case {
        CouplingCase::Case3 => Ok(solve_coupled(src, class, opts)?.branches()),
        _ => {
            let (b0, _) = solve_decoupled(src, class, 0, opts)?;
            let (b1, _) = solve_decoupled(src, class, 1, opts)?;
            Ok([b0, b1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalization_oracle() {
        let (v, m) = diagonalize(1.0, 2.0, 2.0);
        // roots of x^2 - 3x - 2
        assert!((v[0] - (3.0 + 17f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((v[1] - (3.0 - 17f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((v[0] - 3.5616).abs() < 1e-4);
        for i in 0..2 {
            let mv0 = 1.0 * m[i][0] + 2.0 * m[i][1];
            let mv1 = 2.0 * m[i][0] + 2.0 * m[i][1];
            assert!((mv0 - v[i] * m[i][0]).abs() < 1e-14 && (mv1 - v[i] * m[i][1]).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_pair_mixes_evenly() {
        let (v, m) = diagonalize(0.7, 0.7, 0.3);
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] - 0.4).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m[0][0] - s).abs() < 1e-15 && (m[0][1] - s).abs() < 1e-15);
        assert!((m[1][0].abs() - s).abs() < 1e-15 && (m[1][0] + m[1][1]).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_pair_sorts() {
        let (v, m) = diagonalize(1.0, 3.0, 0.0);
        assert_eq!(v, [3.0, 1.0]);
        assert_eq!(m, [[0.0, 1.0], [1.0, 0.0]]);
    }
}
