//! Clebsch–Gordan coefficients with the Condon–Shortley phase.
//!
//! Every angular momentum argument is passed doubled (`two_j = 2j`), so
//! half-integers stay exact. Couplings where one partner is `0`, `1/2` or
//! `1` use closed forms, which stay accurate for arbitrarily large `j`.
//! Other couplings fall back to the Racah sum in log-factorial form,
//! which is fine for moderate arguments (a few dozen).

use super::AngularError;

fn check_pair(two_j: i32, two_m: i32) -> Result<(), AngularError> {
    if two_j < 0 {
        return Err(AngularError::InvalidArgument(format!(
            "negative angular momentum 2j={two_j}"
        )));
    }
    if two_m.abs() > two_j || (two_j - two_m) % 2 != 0 {
        return Err(AngularError::InvalidArgument(format!(
            "projection 2m={two_m} incompatible with 2j={two_j}"
        )));
    }
    Ok(())
}

/// `<j1 m1 j2 m2 | J M>` with doubled arguments.
///
/// Returns zero when `M != m1 + m2` or `J` violates the triangle rule.
pub fn clebsch_gordan(
    two_j1: i32,
    two_m1: i32,
    two_j2: i32,
    two_m2: i32,
    two_jj: i32,
    two_mm: i32,
) -> Result<f64, AngularError> {
    check_pair(two_j1, two_m1)?;
    check_pair(two_j2, two_m2)?;
    check_pair(two_jj, two_mm)?;
    if two_m1 + two_m2 != two_mm {
        return Ok(0.0);
    }
    if two_jj > two_j1 + two_j2 || two_jj < (two_j1 - two_j2).abs() {
        return Ok(0.0);
    }
    if (two_j1 + two_j2 - two_jj) % 2 != 0 {
        return Ok(0.0);
    }
    if two_j2 <= 2 {
        return Ok(small_partner(two_j1, two_m1, two_j2, two_m2, two_jj, two_mm));
    }
    if two_j1 <= 2 {
        // <j1 m1 j2 m2|J M> = (-1)^(j1+j2-J) <j2 m2 j1 m1|J M>
        let sign = if ((two_j1 + two_j2 - two_jj) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(sign * small_partner(two_j2, two_m2, two_j1, two_m1, two_jj, two_mm));
    }
    Ok(racah(two_j1, two_m1, two_j2, two_m2, two_jj, two_mm))
}

/// Closed forms for a second partner with `j2` in {0, 1/2, 1}.
/// Arguments are already validated and triangle-compatible.
fn small_partner(two_j1: i32, two_m1: i32, two_j2: i32, two_m2: i32, two_jj: i32, two_mm: i32) -> f64 {
    let _ = two_m1;
    let j1 = f64::from(two_j1) / 2.0;
    let m = f64::from(two_mm) / 2.0;
    match two_j2 {
        0 => 1.0,
        1 => {
            let den = 2.0 * j1 + 1.0;
            if two_jj == two_j1 + 1 {
                if two_m2 == 1 {
                    ((j1 + m + 0.5) / den).sqrt()
                } else {
                    ((j1 - m + 0.5) / den).sqrt()
                }
            } else if two_m2 == 1 {
                -((j1 - m + 0.5) / den).sqrt()
            } else {
                ((j1 + m + 0.5) / den).sqrt()
            }
        }
        _ => {
            if two_jj == two_j1 + 2 {
                let den = (2.0 * j1 + 1.0) * (2.0 * j1 + 2.0);
                match two_m2 {
                    2 => ((j1 + m) * (j1 + m + 1.0) / den).sqrt(),
                    0 => ((j1 - m + 1.0) * (j1 + m + 1.0) * 2.0 / den).sqrt(),
                    _ => ((j1 - m) * (j1 - m + 1.0) / den).sqrt(),
                }
            } else if two_jj == two_j1 {
                let den = 2.0 * j1 * (j1 + 1.0);
                match two_m2 {
                    2 => -((j1 + m) * (j1 - m + 1.0) / den).sqrt(),
                    0 => m / (j1 * (j1 + 1.0)).sqrt(),
                    _ => ((j1 - m) * (j1 + m + 1.0) / den).sqrt(),
                }
            } else {
                let den = 2.0 * j1 * (2.0 * j1 + 1.0);
                match two_m2 {
                    2 => ((j1 - m) * (j1 - m + 1.0) / den).sqrt(),
                    0 => -((j1 - m) * (j1 + m) * 2.0 / den).sqrt(),
                    _ => ((j1 + m + 1.0) * (j1 + m) / den).sqrt(),
                }
            }
        }
    }
}

fn ln_factorial(n: i32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// General Racah formula. Used only for couplings with both partners above 1.
pub(crate) fn racah(two_j1: i32, two_m1: i32, two_j2: i32, two_m2: i32, two_jj: i32, two_mm: i32) -> f64 {
    let h = |x: i32| x / 2;
    let a = h(two_j1 + two_j2 - two_jj);
    let b = h(two_j1 - two_m1);
    let c = h(two_j2 + two_m2);
    let d = h(two_jj - two_j2 + two_m1);
    let e = h(two_jj - two_j1 - two_m2);
    let pre = 0.5
        * (f64::from(two_jj + 1).ln()
            + ln_factorial(h(two_jj + two_j1 - two_j2))
            + ln_factorial(h(two_jj - two_j1 + two_j2))
            + ln_factorial(a)
            - ln_factorial(h(two_j1 + two_j2 + two_jj) + 1)
            + ln_factorial(h(two_jj + two_mm))
            + ln_factorial(h(two_jj - two_mm))
            + ln_factorial(b)
            + ln_factorial(h(two_j1 + two_m1))
            + ln_factorial(h(two_j2 - two_m2))
            + ln_factorial(c));
    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = ln_factorial(k)
            + ln_factorial(a - k)
            + ln_factorial(b - k)
            + ln_factorial(c - k)
            + ln_factorial(d + k)
            + ln_factorial(e + k);
        let term = (pre - den).exp();
        sum += if k % 2 == 0 { term } else { -term };
    }
    sum
}
