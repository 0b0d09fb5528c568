use super::{EffectivePotential, QuasiError};

const GRID_POINTS: usize = 241;
const GRID_SPAN: f64 = 50.0;
const RESIDUAL_TOL: f64 = 1e-10;

/// A stable circular orbit: `W = ∂W/∂r = 0` with `∂²W/∂r² > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orbit {
    pub ell: u32,
    pub r: f64,
    pub b: f64,
    /// `∂²W/∂r²` at the orbit.
    pub curvature: f64,
    /// `max(|W|, r|∂W/∂r|) / (r² |∂²W/∂r²|)`.
    pub residual: f64,
}

fn finite_jet<P: EffectivePotential + ?Sized>(pot: &P, r: f64, b: f64, ell: u32) -> Option<[f64; 3]> {
    match pot.w_jet(r, b, ell) {
        Ok(w) if w.iter().all(|x| x.is_finite()) => Some(w),
        _ => None,
    }
}

/// Residual relative to the curvature scale `r² W_rr`, which is positive at a stable orbit.
fn residual_of(w: &[f64; 3], r: f64) -> f64 {
    w[0].abs().max((r * w[1]).abs()) / (r * r * w[2].abs()).max(f64::MIN_POSITIVE)
}

/// Orbit search from the potential's scale hint (or `(1, 1)`).
pub fn circular_orbit<P: EffectivePotential + ?Sized>(pot: &P, ell: u32) -> Result<Orbit, QuasiError> {
    if ell == 0 {
        return Err(QuasiError::Domain("orbit index must be positive".into()));
    }
    let hint = pot.scale_hint(ell).unwrap_or((1.0, 1.0));
    let (r, b) = scan(pot, ell, hint)?;
    newton(pot, ell, r, b)
}

/// Damped Newton from `guess`; falls back to the grid scan if Newton fails.
pub fn circular_orbit_from<P: EffectivePotential + ?Sized>(
    pot: &P,
    ell: u32,
    guess: (f64, f64),
) -> Result<Orbit, QuasiError> {
    match newton(pot, ell, guess.0, guess.1) {
        Ok(o) => Ok(o),
        Err(QuasiError::Instability { .. }) | Err(QuasiError::NoOrbit { .. }) => {
            let (r, b) = scan(pot, ell, guess)?;
            newton(pot, ell, r, b)
        }
        Err(e) => Err(e),
    }
}

/// Deepest local minimum of `W(·, b)` on the log grid, refined by bisection on `∂W/∂r`.
fn deepest_minimum<P: EffectivePotential + ?Sized>(pot: &P, ell: u32, b: f64, r0: f64) -> Option<(f64, f64)> {
    let lo = (r0 / GRID_SPAN).ln();
    let hi = (r0 * GRID_SPAN).ln();
    let radii: Vec<f64> = (0..GRID_POINTS)
        .map(|i| (lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect();
    let jets: Vec<Option<[f64; 3]>> = radii.iter().map(|&r| finite_jet(pot, r, b, ell)).collect();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..GRID_POINTS - 1 {
        let (Some(wl), Some(wr)) = (jets[i], jets[i + 1]) else { continue };
        if !(wl[1] < 0.0 && wr[1] >= 0.0) {
            continue;
        }
        let (mut a, mut c) = (radii[i], radii[i + 1]);
        let mut ok = true;
        for _ in 0..80 {
            let m = 0.5 * (a + c);
            match finite_jet(pot, m, b, ell) {
                Some(w) if w[1] < 0.0 => a = m,
                Some(_) => c = m,
                None => {
                    ok = false;
                    break;
                }
            }
            if c - a <= 1e-15 * c {
                break;
            }
        }
        if !ok {
            continue;
        }
        let r = 0.5 * (a + c);
        let Some(w) = finite_jet(pot, r, b, ell) else { continue };
        // a sign change across a pole is not a minimum
        if w[1].abs() > 1e-6 * (wl[1].abs() + wr[1].abs()) || w[2] <= 0.0 {
            continue;
        }
        if best.map_or(true, |(_, v)| w[0] < v) {
            best = Some((r, w[0]));
        }
    }
    best
}

fn scan<P: EffectivePotential + ?Sized>(pot: &P, ell: u32, hint: (f64, f64)) -> Result<(f64, f64), QuasiError> {
    let fail = |reason: &str| QuasiError::NoOrbit { ell, reason: reason.to_string() };
    let (r0, b0) = hint;
    if !(r0 > 0.0) || !b0.is_finite() {
        return Err(fail("invalid search hint"));
    }
    let depth = |b: f64| deepest_minimum(pot, ell, b, r0);
    // start from the hint, widening geometrically until a minimum shows up
    let scale = b0.abs().max(1e-3);
    let starts = std::iter::once(b0).chain((1..=12).flat_map(|k| {
        let f = f64::from(1u32 << k);
        [b0 + scale * (f - 1.0), b0 - scale * (1.0 - 1.0 / f)]
    }));
    let (b0, v0) = starts
        .filter_map(|b| depth(b).map(|(_, v)| (b, v)))
        .next()
        .ok_or_else(|| fail("no local minimum near the hint"))?;
    if v0 == 0.0 {
        return Ok((depth(b0).unwrap().0, b0));
    }
    // the depth decreases with b for a confining channel
    let dir = if v0 > 0.0 { 1.0 } else { -1.0 };
    let (mut b_in, mut b_out) = (b0, f64::NAN);
    let mut step = b0.abs().max(1e-3);
    // nearest b beyond b_in known to have no minimum; trial points stay short of it
    let mut b_wall = f64::NAN;
    for _ in 0..200 {
        let mut b = b_in + dir * step;
        if b_wall.is_finite() && (b - b_wall) * dir >= 0.0 {
            b = 0.5 * (b_in + b_wall);
        }
        match depth(b) {
            Some((_, v)) if v.signum() != v0.signum() => {
                b_out = b;
                break;
            }
            Some(_) => {
                b_in = b;
                step *= 2.0;
            }
            None => {
                b_wall = b;
                if (b_wall - b_in).abs() <= 1e-12 * b_in.abs().max(1e-300) {
                    return Err(fail("minimum lost while bracketing"));
                }
            }
        }
    }
    if b_out.is_nan() {
        return Err(fail("no sign change of the minimum value"));
    }
    let mut r_best = r0;
    for _ in 0..200 {
        let b = 0.5 * (b_in + b_out);
        match depth(b) {
            Some((r, v)) => {
                r_best = r;
                if v.signum() == v0.signum() {
                    b_in = b;
                } else {
                    b_out = b;
                }
            }
            None => return Err(fail("minimum lost during bisection")),
        }
        if (b_out - b_in).abs() <= 1e-6 * b.abs().max(1e-300) {
            break;
        }
    }
    Ok((r_best, 0.5 * (b_in + b_out)))
}

fn newton<P: EffectivePotential + ?Sized>(pot: &P, ell: u32, r0: f64, b0: f64) -> Result<Orbit, QuasiError> {
    let fail = |reason: String| QuasiError::NoOrbit { ell, reason };
    let (mut r, mut b) = (r0, b0);
    let mut w = finite_jet(pot, r, b, ell).ok_or_else(|| fail(format!("W not finite at r={r}, b={b}")))?;
    let mut res = residual_of(&w, r);
    for _ in 0..100 {
        if res <= 1e-14 {
            break;
        }
        let hb = 1e-6 * b.abs().max(1e-6 * r * r * w[2].abs());
        let wp = finite_jet(pot, r, b + hb, ell).ok_or_else(|| fail("b-derivative failed".into()))?;
        let wm = finite_jet(pot, r, b - hb, ell).ok_or_else(|| fail("b-derivative failed".into()))?;
        let wb = (wp[0] - wm[0]) / (2.0 * hb);
        let wrb = (wp[1] - wm[1]) / (2.0 * hb);
        let det = w[1] * wrb - wb * w[2];
        if det == 0.0 || !det.is_finite() {
            return Err(fail("singular Newton matrix".into()));
        }
        let dr = -(wrb * w[0] - wb * w[1]) / det;
        let db = -(-w[2] * w[0] + w[1] * w[1]) / det;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (rn, bn) = (r + t * dr, b + t * db);
            if rn > 0.0 {
                if let Some(wn) = finite_jet(pot, rn, bn, ell) {
                    let rn_res = residual_of(&wn, rn);
                    if rn_res < res || (t < 1e-6 && rn_res <= res) {
                        r = rn;
                        b = bn;
                        w = wn;
                        res = rn_res;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if (t * dr).abs() <= 1e-16 * r && (t * db).abs() <= 1e-16 * b.abs() {
            break;
        }
    }
    if res > RESIDUAL_TOL {
        return Err(fail(format!("Newton stalled at residual {res:e}")));
    }
    if w[2] <= 0.0 {
        return Err(QuasiError::Instability { ell, r, curvature: w[2] });
    }
    Ok(Orbit { ell, r, b, curvature: w[2], residual: res })
}
