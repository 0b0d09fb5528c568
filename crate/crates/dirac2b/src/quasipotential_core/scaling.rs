use rayon::prelude::*;

use super::orbit::{circular_orbit, circular_orbit_from, Orbit};
use super::{EffectivePotential, QuasiError};
use crate::numerics::{polyfit, richardson_first, richardson_second, snap_rational};

/// Orbit ladder used to fit the asymptotic exponents.
pub const DEFAULT_FIT_LADDER: [u32; 4] = [64, 128, 256, 512];

/// Indices whose `λ = 1/√index` samples are extrapolated to `λ → 0`.
pub const DEFAULT_LIMIT_LADDER: [u32; 7] = [10_000, 20_000, 40_000, 80_000, 160_000, 320_000, 640_000];

/// Step in `μ` (and `ρ` for mixed terms) of the Richardson stencil.
pub const STENCIL_STEP: f64 = 2e-3;

/// Which angular quantum number defines `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaIndex {
    /// `λ = 1/√ℓ`
    Orbital,
    /// `λ = 1/√j`
    Total,
}

pub fn lambda_of(index: u32) -> f64 {
    1.0 / f64::from(index).sqrt()
}

/// `r∞(λ) = C_r λ^(−p) (1 + c_r λ)` and `b∞(λ) = C_b λ^(−q) (1 + c_b λ)`.
///
/// The corrections `c_r`, `c_b` are zero for fitted scalings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticScaling {
    pub c_r: f64,
    pub p: f64,
    pub c_b: f64,
    pub q: f64,
    pub index: LambdaIndex,
    pub r_correction: f64,
    pub b_correction: f64,
}

impl AsymptoticScaling {
    pub fn manual(c_r: f64, p: f64, c_b: f64, q: f64) -> Self {
        AsymptoticScaling { c_r, p, c_b, q, index: LambdaIndex::Orbital, r_correction: 0.0, b_correction: 0.0 }
    }

    pub fn with_index(mut self, index: LambdaIndex) -> Self {
        self.index = index;
        self
    }

    pub fn with_corrections(mut self, r_correction: f64, b_correction: f64) -> Self {
        self.r_correction = r_correction;
        self.b_correction = b_correction;
        self
    }

    pub fn r_inf(&self, lambda: f64) -> f64 {
        self.c_r * lambda.powf(-self.p) * (1.0 + self.r_correction * lambda)
    }

    pub fn b_inf(&self, lambda: f64) -> f64 {
        self.c_b * lambda.powf(-self.q) * (1.0 + self.b_correction * lambda)
    }

    /// Same exponents and coefficients within `tol` (relative).
    pub fn matches(&self, other: &AsymptoticScaling, tol: f64) -> bool {
        let rel = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        self.p == other.p && self.q == other.q && rel(self.c_r, other.c_r) && rel(self.c_b, other.c_b)
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub ladder: Vec<u32>,
    pub limit_ladder: Vec<u32>,
    pub index: LambdaIndex,
    /// Newton-correct `C_r`, `C_b` so the extrapolated zero-order conditions hold exactly.
    pub refine: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            ladder: DEFAULT_FIT_LADDER.to_vec(),
            limit_ladder: DEFAULT_LIMIT_LADDER.to_vec(),
            index: LambdaIndex::Orbital,
            refine: true,
        }
    }
}

/// `W̄(ρ, μ, λ) = λ⁴ r∞² W(r∞ρ, b∞μ, ℓ)` with its first two `ρ` derivatives.
pub fn normalized<P: EffectivePotential + ?Sized>(
    pot: &P,
    scaling: &AsymptoticScaling,
    rho: f64,
    mu: f64,
    ell: u32,
) -> Result<[f64; 3], QuasiError> {
    let lam = lambda_of(ell);
    let r_inf = scaling.r_inf(lam);
    let b_inf = scaling.b_inf(lam);
    let w = pot.w_jet(r_inf * rho, b_inf * mu, ell)?;
    let f = lam.powi(4) * r_inf * r_inf;
    Ok([f * w[0], f * w[1] * r_inf, f * w[2] * r_inf * r_inf])
}

/// Value and first/second partials in `(ρ, μ)` of a normalized function.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LocalPartials {
    pub f: f64,
    pub f_r: f64,
    pub f_m: f64,
    pub f_rr: f64,
    pub f_mm: f64,
    pub f_rm: f64,
}

impl LocalPartials {
    fn to_array(self) -> [f64; 6] {
        [self.f, self.f_r, self.f_m, self.f_rr, self.f_mm, self.f_rm]
    }
    fn from_array(a: [f64; 6]) -> Self {
        LocalPartials { f: a[0], f_r: a[1], f_m: a[2], f_rr: a[3], f_mm: a[4], f_rm: a[5] }
    }
}

/// Partials of `g(ρ, μ)` at one index; `ρ` derivatives come from the jet, `μ`
/// derivatives from a Richardson-corrected central stencil.
pub(crate) fn stencil_partials<G>(g: G, rho: f64, mu: f64, h: f64) -> Result<LocalPartials, QuasiError>
where
    G: Fn(f64, f64) -> Result<[f64; 3], QuasiError>,
{
    let c = g(rho, mu)?;
    let p1 = g(rho, mu + h)?;
    let m1 = g(rho, mu - h)?;
    let p2 = g(rho, mu + 2.0 * h)?;
    let m2 = g(rho, mu - 2.0 * h)?;
    Ok(LocalPartials {
        f: c[0],
        f_r: c[1],
        f_m: richardson_first(p1[0], m1[0], p2[0], m2[0], h),
        f_rr: c[2],
        f_mm: richardson_second(c[0], p1[0], m1[0], p2[0], m2[0], h),
        f_rm: richardson_first(p1[1], m1[1], p2[1], m2[1], h),
    })
}

pub fn local_partials<P: EffectivePotential + ?Sized>(
    pot: &P,
    scaling: &AsymptoticScaling,
    rho: f64,
    mu: f64,
    ell: u32,
) -> Result<LocalPartials, QuasiError> {
    stencil_partials(|r, m| normalized(pot, scaling, r, m, ell), rho, mu, STENCIL_STEP)
}

/// Polynomial-in-`λ` coefficients of per-index partials; element `k` holds the
/// `λ^k` coefficient of every field, so element 0 is the `λ → 0` limit.
pub(crate) fn extrapolate(ells: &[u32], rows: &[LocalPartials]) -> Vec<LocalPartials> {
    let lams: Vec<f64> = ells.iter().map(|&l| lambda_of(l)).collect();
    let deg = 4.min(ells.len().saturating_sub(2)).max(1).min(ells.len() - 1);
    let mut out = vec![[0.0; 6]; deg + 1];
    for field in 0..6 {
        let ys: Vec<f64> = rows.iter().map(|p| p.to_array()[field]).collect();
        let c = polyfit(&lams, &ys, deg);
        for (k, ck) in c.into_iter().enumerate() {
            out[k][field] = ck;
        }
    }
    out.into_iter().map(LocalPartials::from_array).collect()
}

pub fn limit_partials<P: EffectivePotential + ?Sized>(
    pot: &P,
    scaling: &AsymptoticScaling,
    rho: f64,
    mu: f64,
    ells: &[u32],
) -> Result<Vec<LocalPartials>, QuasiError> {
    let rows: Vec<LocalPartials> = ells
        .par_iter()
        .map(|&ell| local_partials(pot, scaling, rho, mu, ell))
        .collect::<Result<_, _>>()?;
    Ok(extrapolate(ells, &rows))
}

/// Maximum of `|W̄|` over `ρ, μ ∈ [0.9, 1.1]` at `λ = 10⁻²` and `λ = 10⁻³`.
pub fn boundedness<P: EffectivePotential + ?Sized>(
    pot: &P,
    scaling: &AsymptoticScaling,
) -> Result<(f64, f64), QuasiError> {
    let max_at = |ell: u32| -> Result<f64, QuasiError> {
        let mut m = 0.0f64;
        for i in 0..5 {
            for k in 0..5 {
                let rho = 0.9 + 0.05 * f64::from(i);
                let mu = 0.9 + 0.05 * f64::from(k);
                m = m.max(normalized(pot, scaling, rho, mu, ell)?[0].abs());
            }
        }
        Ok(m)
    };
    let coarse = max_at(10_000)?;
    let fine = max_at(1_000_000)?;
    if !(coarse.is_finite() && fine.is_finite()) || (coarse - fine).abs() > 0.1 * coarse.max(fine) {
        return Err(QuasiError::Normalization { coarse, fine });
    }
    Ok((coarse, fine))
}

/// Orbits along `ladder`, each seeded by power-law continuation of the previous two.
pub(crate) fn orbit_ladder<P: EffectivePotential + ?Sized>(
    pot: &P,
    ladder: &[u32],
    first_guess: Option<(f64, f64)>,
) -> Result<Vec<Orbit>, QuasiError> {
    let mut out: Vec<Orbit> = Vec::with_capacity(ladder.len());
    for &ell in ladder {
        let guess = match out.len() {
            0 => first_guess,
            1 => Some((out[0].r, out[0].b)),
            n => {
                let (a, c) = (&out[n - 2], &out[n - 1]);
                let t = (f64::from(ell) / f64::from(c.ell)).ln() / (f64::from(c.ell) / f64::from(a.ell)).ln();
                let r = c.r * (c.r / a.r).powf(t);
                let b = if a.b * c.b > 0.0 { c.b * (c.b / a.b).powf(t) } else { c.b };
                Some((r, b))
            }
        };
        let o = match guess {
            Some(g) => circular_orbit_from(pot, ell, g)?,
            None => circular_orbit(pot, ell)?,
        };
        out.push(o);
    }
    Ok(out)
}

fn exponent(lams: &[f64], ys: &[f64], what: &str) -> Result<f64, QuasiError> {
    let mut mids = Vec::new();
    let mut slopes = Vec::new();
    for k in 0..lams.len() - 1 {
        mids.push((lams[k] * lams[k + 1]).sqrt());
        slopes.push(-(ys[k + 1] / ys[k]).ln() / (lams[k + 1] / lams[k]).ln());
    }
    let raw = polyfit(&mids, &slopes, 2.min(slopes.len() - 1))[0];
    let (n, d) = snap_rational(raw, 6, 1e-3)
        .ok_or_else(|| QuasiError::Scaling(format!("{what} exponent {raw} is not a simple rational")))?;
    Ok(f64::from(n) / f64::from(d))
}

pub fn fit_asymptotics<P: EffectivePotential + ?Sized>(
    pot: &P,
    opts: &FitOptions,
) -> Result<AsymptoticScaling, QuasiError> {
    if opts.ladder.len() < 3 {
        return Err(QuasiError::Scaling("need at least three ladder points".into()));
    }
    let orbits = orbit_ladder(pot, &opts.ladder, None)?;
    let lams: Vec<f64> = opts.ladder.iter().map(|&l| lambda_of(l)).collect();
    let rs: Vec<f64> = orbits.iter().map(|o| o.r).collect();
    let bs: Vec<f64> = orbits.iter().map(|o| o.b).collect();
    if bs.iter().any(|b| b.signum() != bs[0].signum() || *b == 0.0) {
        return Err(QuasiError::Scaling("binding parameter changes sign along the ladder".into()));
    }
    let p = exponent(&lams, &rs, "radius")?;
    let babs: Vec<f64> = bs.iter().map(|b| b.abs()).collect();
    let q = exponent(&lams, &babs, "binding")?;
    let deg = 2.min(lams.len() - 1);
    let yr: Vec<f64> = rs.iter().zip(&lams).map(|(r, l)| r * l.powf(p)).collect();
    let yb: Vec<f64> = bs.iter().zip(&lams).map(|(b, l)| b * l.powf(q)).collect();
    let mut s = AsymptoticScaling::manual(polyfit(&lams, &yr, deg)[0], p, polyfit(&lams, &yb, deg)[0], q)
        .with_index(opts.index);
    if opts.refine {
        s = refine(pot, s, &opts.limit_ladder)?;
    }
    boundedness(pot, &s)?;
    Ok(s)
}

/// Newton on `(ρ, μ)` for `W̄⁰ = ∂W̄⁰/∂ρ = 0`, absorbed into `C_r`, `C_b`.
fn refine<P: EffectivePotential + ?Sized>(
    pot: &P,
    mut s: AsymptoticScaling,
    ells: &[u32],
) -> Result<AsymptoticScaling, QuasiError> {
    for _ in 0..30 {
        let lim = limit_partials(pot, &s, 1.0, 1.0, ells)?[0];
        let det = lim.f_r * lim.f_rm - lim.f_m * lim.f_rr;
        if det == 0.0 || !det.is_finite() {
            return Err(QuasiError::Scaling("refinement Jacobian is singular".into()));
        }
        let dr = -(lim.f_rm * lim.f - lim.f_m * lim.f_r) / det;
        let dm = -(-lim.f_rr * lim.f + lim.f_r * lim.f_r) / det;
        let (dr, dm) = (dr.clamp(-0.2, 0.2), dm.clamp(-0.2, 0.2));
        s.c_r *= 1.0 + dr;
        s.c_b *= 1.0 + dm;
        if dr.abs() < 1e-14 && dm.abs() < 1e-14 {
            break;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasipotential_core::{FnPotential, Quasipotential};

    #[test]
    fn oscillator_exponents() {
        let pot = FnPotential::new(|r: f64, b: f64, ell: u32| {
            let l2 = f64::from(ell) * f64::from(ell + 1);
            [r * r + l2 / (r * r) - b, 2.0 * r - 2.0 * l2 / r.powi(3), 2.0 + 6.0 * l2 / r.powi(4)]
        })
        .with_hint(|l| (f64::from(l).sqrt(), 2.0 * f64::from(l)));
        let s = fit_asymptotics(&pot, &FitOptions::default()).unwrap();
        assert_eq!((s.p, s.q), (1.0, 2.0));
        assert!((s.c_r - 1.0).abs() < 1e-10);
        assert!((s.c_b - 2.0).abs() < 1e-10);
    }

    #[test]
    fn linear_exponents() {
        let pot = Quasipotential::new(0.0, 0.0, |r: f64, _| [r, 1.0, 0.0])
            .with_hint(|l| (f64::from(l).powf(2.0 / 3.0), f64::from(l).powf(2.0 / 3.0)));
        let s = fit_asymptotics(&pot, &FitOptions::default()).unwrap();
        assert_eq!((s.p, s.q), (4.0 / 3.0, 4.0 / 3.0));
        assert!((s.c_r - 2f64.powf(1.0 / 3.0)).abs() < 1e-9);
        assert!((s.c_b - 1.5 * 2f64.powf(1.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn manual_scaling_is_checked_for_boundedness() {
        let pot = FnPotential::new(|r: f64, b: f64, ell: u32| {
            let l2 = f64::from(ell) * f64::from(ell + 1);
            [r * r + l2 / (r * r) - b, 2.0 * r - 2.0 * l2 / r.powi(3), 2.0 + 6.0 * l2 / r.powi(4)]
        });
        assert!(boundedness(&pot, &AsymptoticScaling::manual(1.0, 1.0, 2.0, 2.0)).is_ok());
        assert!(matches!(
            boundedness(&pot, &AsymptoticScaling::manual(1.0, 1.0, 2.0, 3.0)),
            Err(QuasiError::Normalization { .. })
        ));
    }
}
