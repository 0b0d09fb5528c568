//! Small numerical helpers shared by the expansion modules.

use nalgebra::{DMatrix, DVector};

/// Least-squares polynomial coefficients `c_0..c_deg` of `y(x)`.
///
/// The abscissae are rescaled by their largest magnitude before solving,
/// which keeps the Vandermonde system well conditioned for small `x`.
pub fn polyfit(xs: &[f64], ys: &[f64], deg: usize) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() > deg, "need more samples than the degree");
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(xs.len(), deg + 1, |i, k| (xs[i] / scale).powi(k as i32));
    let y = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let c = svd.solve(&y, 1e-14).expect("svd solve with both factors");
    (0..=deg).map(|k| c[k] / scale.powi(k as i32)).collect()
}

/// Central first derivative with one Richardson step, from `f(x +- h)` and `f(x +- 2h)`.
pub fn richardson_first(fp1: f64, fm1: f64, fp2: f64, fm2: f64, h: f64) -> f64 {
    let d1 = (fp1 - fm1) / (2.0 * h);
    let d2 = (fp2 - fm2) / (4.0 * h);
    (4.0 * d1 - d2) / 3.0
}

/// Central second derivative with one Richardson step.
pub fn richardson_second(f0: f64, fp1: f64, fm1: f64, fp2: f64, fm2: f64, h: f64) -> f64 {
    let s1 = (fp1 - 2.0 * f0 + fm1) / (h * h);
    let s2 = (fp2 - 2.0 * f0 + fm2) / (4.0 * h * h);
    (4.0 * s1 - s2) / 3.0
}

/// Nearest fraction with denominator at most `max_den`, if within `tol`.
pub fn snap_rational(x: f64, max_den: i32, tol: f64) -> Option<(i32, i32)> {
    let mut best: Option<(i32, i32, f64)> = None;
    for den in 1..=max_den {
        let num = (x * f64::from(den)).round() as i32;
        let err = (x - f64::from(num) / f64::from(den)).abs();
        if err <= tol && best.map_or(true, |b| err < b.2 - 1e-15) {
            best = Some((num, den, err));
        }
    }
    best.map(|(n, d, _)| {
        let g = gcd(n.abs(), d);
        (n / g, d / g)
    })
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}
