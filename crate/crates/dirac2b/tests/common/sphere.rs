//! Brute-force sphere quadrature of angular matrix elements.
//!
//! Each harmonic is rebuilt as a 4-spinor field `psi(theta, phi)` from explicit
//! spherical harmonics, operators act with Cartesian Pauli matrices, and the
//! overlap is integrated with Gauss-Legendre in `cos(theta)` times a uniform
//! azimuth grid.

use dirac2b::angular_algebra::{build_harmonics, matrix_element, AngularState, DiracBlock, OperatorWord, Sector};
use num_complex::Complex64 as C;

const N_THETA: usize = 40;
const N_PHI: usize = 64;

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `P_l^m(x)` with the Condon-Shortley phase, `m >= 0`.
fn assoc_legendre(l: i64, m: i64, x: f64) -> f64 {
    let s = (1.0 - x * x).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    for ll in (m + 2)..=l {
        let p = (x * (2 * ll - 1) as f64 * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = p;
    }
    pm1
}

fn ylm(l: i64, m: i64, x: f64, phi: f64) -> C {
    if m.abs() > l {
        return C::new(0.0, 0.0);
    }
    if m < 0 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        return ylm(l, -m, x, phi).conj() * sign;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * factorial(l - m) / factorial(l + m)).sqrt();
    C::from_polar(norm * assoc_legendre(l, m, x), m as f64 * phi)
}

/// `d/dtheta Y_lm` from the ladder identity.
fn ylm_dtheta(l: i64, m: i64, x: f64, phi: f64) -> C {
    let s = (1.0 - x * x).sqrt();
    let up = (((l - m) * (l + m + 1)) as f64).sqrt();
    ylm(l, m, x, phi) * (m as f64 * x / s) + C::from_polar(up, -phi) * ylm(l, m + 1, x, phi)
}

type Spinor = [C; 4];

fn spin_index(two_m1: i32, two_m2: i32) -> usize {
    2 * usize::from(two_m1 < 0) + usize::from(two_m2 < 0)
}

fn field(state: &AngularState, x: f64, phi: f64) -> Spinor {
    let mut out = [C::new(0.0, 0.0); 4];
    for (k, c) in &state.coefficients {
        out[spin_index(k.two_m1, k.two_m2)] += ylm(i64::from(k.l), k.ml, x, phi) * *c;
    }
    out
}

fn pauli() -> [[[C; 2]; 2]; 3] {
    let (o, i, z) = (C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, 0.0));
    [[[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]]
}

/// `(A (x) B) psi` for 2x2 `A` on particle 1 and `B` on particle 2.
fn kron_apply(a: &[[C; 2]; 2], b: &[[C; 2]; 2], psi: &Spinor) -> Spinor {
    let mut out = [C::new(0.0, 0.0); 4];
    for s1 in 0..2 {
        for s2 in 0..2 {
            for t1 in 0..2 {
                for t2 in 0..2 {
                    out[2 * s1 + s2] += a[s1][t1] * b[s2][t2] * psi[2 * t1 + t2];
                }
            }
        }
    }
    out
}

fn ident() -> [[C; 2]; 2] {
    let (o, z) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
    [[o, z], [z, o]]
}

fn sigma_dot(n: [f64; 3]) -> [[C; 2]; 2] {
    let p = pauli();
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for (k, nk) in n.iter().enumerate() {
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] += p[k][r][c] * *nk;
            }
        }
    }
    m
}

/// `sigma_p . L psi` with `L = -i r x grad` written in spherical angles.
fn sigma_l(state: &AngularState, particle: usize, x: f64, phi: f64) -> Spinor {
    let s = (1.0 - x * x).sqrt();
    let cot = x / s;
    let i = C::new(0.0, 1.0);
    let p = pauli();
    let mut out = [C::new(0.0, 0.0); 4];
    for (k, c) in &state.coefficients {
        let (l, m) = (i64::from(k.l), k.ml);
        let y = ylm(l, m, x, phi);
        let dth = ylm_dtheta(l, m, x, phi);
        let dph = y * C::new(0.0, m as f64);
        let lx = i * (dth * phi.sin() + dph * cot * phi.cos());
        let ly = i * (-dth * phi.cos() + dph * cot * phi.sin());
        let lz = -i * dph;
        let mut unit = [C::new(0.0, 0.0); 4];
        unit[spin_index(k.two_m1, k.two_m2)] = C::new(*c, 0.0);
        for (comp, lc) in [lx, ly, lz].into_iter().enumerate() {
            let applied =
                if particle == 1 { kron_apply(&p[comp], &ident(), &unit) } else { kron_apply(&ident(), &p[comp], &unit) };
            for a in 0..4 {
                out[a] += applied[a] * lc;
            }
        }
    }
    out
}

pub fn quadrature(word: OperatorWord, bra: &AngularState, ket: &AngularState) -> f64 {
    let nodes = gauss_legendre(N_THETA);
    let mut total = C::new(0.0, 0.0);
    for &(x, wx) in &nodes {
        let s = (1.0 - x * x).sqrt();
        for k in 0..N_PHI {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / N_PHI as f64;
            let n = [s * phi.cos(), s * phi.sin(), x];
            let psi = field(ket, x, phi);
            let applied = match word {
                OperatorWord::Identity | OperatorWord::Beta1 | OperatorWord::Beta2 => psi,
                OperatorWord::SigmaN1 => kron_apply(&sigma_dot(n), &ident(), &psi),
                OperatorWord::SigmaN2 => kron_apply(&ident(), &sigma_dot(n), &psi),
                OperatorWord::SigmaN1SigmaN2 => kron_apply(&sigma_dot(n), &sigma_dot(n), &psi),
                OperatorWord::Sigma1Sigma2 => {
                    let p = pauli();
                    let mut acc = [C::new(0.0, 0.0); 4];
                    for c in 0..3 {
                        let t = kron_apply(&p[c], &p[c], &psi);
                        for a in 0..4 {
                            acc[a] += t[a];
                        }
                    }
                    acc
                }
                OperatorWord::SigmaL1 => sigma_l(ket, 1, x, phi),
                OperatorWord::SigmaL2 => sigma_l(ket, 2, x, phi),
            };
            let b = field(bra, x, phi);
            let w = wx * 2.0 * std::f64::consts::PI / N_PHI as f64;
            for a in 0..4 {
                total += b[a].conj() * applied[a] * w;
            }
        }
    }
    let beta = |word: OperatorWord| {
        let (x, y) = ket.block.indices();
        match word {
            OperatorWord::Beta1 if bra.block != ket.block => 0.0,
            OperatorWord::Beta2 if bra.block != ket.block => 0.0,
            OperatorWord::Beta1 => 1.0 - 2.0 * x as f64,
            OperatorWord::Beta2 => 1.0 - 2.0 * y as f64,
            _ => 1.0,
        }
    };
    assert!(total.im.abs() < 1e-10, "imaginary part {}", total.im);
    beta(word) * total.re
}


/// Largest |exact - quadrature| over large-large and small-large representatives of both sectors, with the count.
pub fn worst_deviation(j_max: u32) -> (usize, f64) {
    let mut checked = 0;
    let mut worst = 0.0f64;
    for j in 0..=j_max {
        let mut states = build_harmonics(j, Sector::EqualOrbital).unwrap();
        states.extend(build_harmonics(j, Sector::ShiftedOrbital).unwrap());
        let reps: Vec<&AngularState> = states
            .iter()
            .filter(|s| matches!(s.block, DiracBlock::LargeLarge | DiracBlock::SmallLarge))
            .collect();
        for word in OperatorWord::ALL {
            for bra in &reps {
                for ket in &reps {
                    let exact = matrix_element(word, bra, ket).unwrap();
                    worst = worst.max((exact - quadrature(word, bra, ket)).abs());
                    checked += 1;
                }
            }
        }
    }
    (checked, worst)
}
