//! Projection of the two-body Dirac operator onto the angular sections:
//! `{H d/dr + G/r + m + U(r) - E} X = 0` for the radial amplitudes `X`.

use nalgebra::{DMatrix, DVector};

use super::harmonics::{build_harmonics, AngularState, HarmonicLabel, Sector};
use super::operators::ProjectedOperators;
use super::AngularError;

/// Laurent polynomial `u(r) = sum_k c_k r^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialProfile {
    pub terms: Vec<(i32, f64)>,
}

impl RadialProfile {
    pub fn new(terms: Vec<(i32, f64)>) -> Self {
        let mut p = RadialProfile { terms };
        p.normalize();
        p
    }

    /// `a r`
    pub fn linear(slope: f64) -> Self {
        RadialProfile::new(vec![(1, slope)])
    }

    /// `-alpha / r`
    pub fn coulomb(alpha: f64) -> Self {
        RadialProfile::new(vec![(-1, -alpha)])
    }

    pub fn power(k: i32, c: f64) -> Self {
        RadialProfile::new(vec![(k, c)])
    }

    fn normalize(&mut self) {
        self.terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(i32, f64)> = Vec::new();
        for (k, c) in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += c,
                _ => merged.push((k, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        self.terms = merged;
    }

    pub fn add(&self, other: &RadialProfile) -> RadialProfile {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        RadialProfile::new(terms)
    }

    pub fn scale(&self, s: f64) -> RadialProfile {
        RadialProfile::new(self.terms.iter().map(|&(k, c)| (k, c * s)).collect())
    }

    /// `r u'(r)`
    pub fn r_derivative(&self) -> RadialProfile {
        RadialProfile::new(self.terms.iter().map(|&(k, c)| (k, f64::from(k) * c)).collect())
    }

    /// n-th derivative at `r`.
    pub fn derivative(&self, r: f64, n: usize) -> f64 {
        self.terms.iter().map(|&(k, c)| c * power_derivative(k, r, n)).sum()
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivative(r, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// n-th derivative of `r^k`.
pub(crate) fn power_derivative(k: i32, r: f64, n: usize) -> f64 {
    let mut coef = 1.0;
    for i in 0..n {
        let f = f64::from(k) - i as f64;
        if f == 0.0 {
            return 0.0;
        }
        coef *= f;
    }
    coef * r.powi(k - n as i32)
}

/// Dirac-matrix words of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiracWord {
    One,
    Beta1,
    Beta2,
    Beta1Beta2,
    Alpha1Alpha2,
    /// `(n.alpha1)(n.alpha2)`
    AlphaN1AlphaN2,
}

/// Which radial factor multiplies a word: `u(r)` or `r u'(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileUse {
    Value,
    RTimesDerivative,
}

/// Built-in spin structures of the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructureKind {
    VectorStatic,
    VectorGaunt,
    VectorRetarded,
    ScalarYukawa,
    ScalarMinimal,
    ScalarHalfSum,
    ScalarProjector,
    Identity,
}

impl StructureKind {
    pub const ALL: [StructureKind; 8] = [
        StructureKind::VectorStatic,
        StructureKind::VectorGaunt,
        StructureKind::VectorRetarded,
        StructureKind::ScalarYukawa,
        StructureKind::ScalarMinimal,
        StructureKind::ScalarHalfSum,
        StructureKind::ScalarProjector,
        StructureKind::Identity,
    ];

    pub const VECTORS: [StructureKind; 3] =
        [StructureKind::VectorStatic, StructureKind::VectorGaunt, StructureKind::VectorRetarded];

    pub const SCALARS: [StructureKind; 4] = [
        StructureKind::ScalarYukawa,
        StructureKind::ScalarMinimal,
        StructureKind::ScalarHalfSum,
        StructureKind::ScalarProjector,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StructureKind::VectorStatic => "vector-static",
            StructureKind::VectorGaunt => "vector-gaunt",
            StructureKind::VectorRetarded => "vector-retarded",
            StructureKind::ScalarYukawa => "scalar-yukawa",
            StructureKind::ScalarMinimal => "scalar-minimal",
            StructureKind::ScalarHalfSum => "scalar-half",
            StructureKind::ScalarProjector => "scalar-projector",
            StructureKind::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        StructureKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_vector(self) -> bool {
        StructureKind::VECTORS.contains(&self)
    }

    pub fn is_scalar(self) -> bool {
        StructureKind::SCALARS.contains(&self)
    }

    /// Fixed word expansion with rational coefficients.
    pub fn words(self) -> &'static [(DiracWord, f64, ProfileUse)] {
        use DiracWord::*;
        use ProfileUse::*;
        match self {
            StructureKind::VectorStatic | StructureKind::Identity => &[(One, 1.0, Value)],
            StructureKind::VectorGaunt => &[(One, 1.0, Value), (Alpha1Alpha2, -1.0, Value)],
            StructureKind::VectorRetarded => &[
                (One, 1.0, Value),
                (Alpha1Alpha2, -0.5, Value),
                (AlphaN1AlphaN2, 0.5, RTimesDerivative),
            ],
            StructureKind::ScalarYukawa => &[(Beta1Beta2, 1.0, Value)],
            StructureKind::ScalarMinimal => &[(Beta1, 0.5, Value), (Beta2, 0.5, Value)],
            StructureKind::ScalarHalfSum => &[(One, 0.5, Value), (Beta1Beta2, 0.5, Value)],
            StructureKind::ScalarProjector => {
                &[(One, 0.25, Value), (Beta1, 0.25, Value), (Beta2, 0.25, Value), (Beta1Beta2, 0.25, Value)]
            }
        }
    }
}

/// A spin structure with its radial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinStructure {
    pub kind: StructureKind,
    pub profile: RadialProfile,
}

impl SpinStructure {
    pub fn new(kind: StructureKind, profile: RadialProfile) -> Self {
        SpinStructure { kind, profile }
    }
}

/// First-order radial problem at fixed `(j, sector)`.
#[derive(Debug, Clone)]
pub struct RadialSystem {
    pub j: u32,
    pub sector: Sector,
    pub sections: Vec<AngularState>,
    pub h: DMatrix<f64>,
    pub g: DMatrix<f64>,
    /// Diagonal of the mass matrix.
    pub mass: DVector<f64>,
    /// Projected word matrices, in [`DiracWord`] order of `words()`.
    pub words: Vec<(DiracWord, DMatrix<f64>)>,
    /// `U(r) = sum_k r^k U_k`.
    pub potential: Vec<(i32, DMatrix<f64>)>,
}

/// `i^e` when real.
fn i_power(e: i32) -> Option<f64> {
    match e.rem_euclid(4) {
        0 => Some(1.0),
        2 => Some(-1.0),
        _ => None,
    }
}

impl RadialSystem {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn word(&self, w: DiracWord) -> &DMatrix<f64> {
        &self.words.iter().find(|(k, _)| *k == w).expect("all words are built").1
    }

    /// `U(r)` and its first `order` derivatives.
    pub fn potential_derivatives(&self, r: f64, order: usize) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        (0..=order)
            .map(|d| {
                let mut m = DMatrix::zeros(n, n);
                for (k, mk) in &self.potential {
                    m += mk * super::radial::power_derivative(*k, r, d);
                }
                m
            })
            .collect()
    }

    /// `V(r,E) = G/r + m + U(r) - E` and its first `order` r-derivatives.
    pub fn v_derivatives(&self, r: f64, energy: f64, order: usize) -> Vec<DMatrix<f64>> {
        let mut out = self.potential_derivatives(r, order);
        for (d, m) in out.iter_mut().enumerate() {
            *m += &self.g * power_derivative(-1, r, d);
            if d == 0 {
                for i in 0..m.nrows() {
                    m[(i, i)] += self.mass[i] - energy;
                }
            }
        }
        out
    }

    pub fn v(&self, r: f64, energy: f64) -> DMatrix<f64> {
        self.v_derivatives(r, energy, 0).remove(0)
    }

    pub fn potential(&self, r: f64) -> DMatrix<f64> {
        self.potential_derivatives(r, 0).remove(0)
    }
}

/// Builds H, G, m and U(r) for the given structures.
pub fn build_radial_system(
    structures: &[SpinStructure],
    m1: f64,
    m2: f64,
    j: u32,
    sector: Sector,
) -> Result<RadialSystem, AngularError> {
    if m1 < 0.0 || m2 < 0.0 || !m1.is_finite() || !m2.is_finite() {
        return Err(AngularError::InvalidArgument(format!("masses must be finite and >= 0, got {m1}, {m2}")));
    }
    let sections = build_harmonics(j, sector)?;
    let ops = ProjectedOperators::new(j)?;
    let na = ops.labels.len();
    let id = DMatrix::<f64>::identity(na, na);
    let k1 = &ops.sigma_n1 * (&id + &ops.sigma_l1);
    let k2 = &ops.sigma_n2 * (&id + &ops.sigma_l2);

    let n = sections.len();
    let mut h = DMatrix::zeros(n, n);
    let mut g = DMatrix::zeros(n, n);
    let word_list = [
        DiracWord::One,
        DiracWord::Beta1,
        DiracWord::Beta2,
        DiracWord::Beta1Beta2,
        DiracWord::Alpha1Alpha2,
        DiracWord::AlphaN1AlphaN2,
    ];
    let mut words: Vec<(DiracWord, DMatrix<f64>)> = word_list.iter().map(|w| (*w, DMatrix::zeros(n, n))).collect();
    let idx = |l: HarmonicLabel| ops.index(l).expect("section label exists at this j");

    for (k, sk) in sections.iter().enumerate() {
        let (xk, yk) = sk.block.indices();
        let a = idx(sk.label);
        for (l, sl) in sections.iter().enumerate() {
            let (xl, yl) = sl.block.indices();
            let b = idx(sl.label);
            // conj(c_k) c_l with c = i for diagonal-block sections
            let phase = i32::from(sl.imaginary) - i32::from(sk.imaginary);
            let real_phase = |extra: i32, word: &'static str| -> Result<f64, AngularError> {
                i_power(phase + extra).ok_or(AngularError::NonClosure { word, residual: 1.0 })
            };
            if yk == yl && xk != xl {
                // particle 1 flips large/small
                h[(k, l)] += real_phase(3, "alpha1.p")? * ops.sigma_n1[(a, b)];
                g[(k, l)] += real_phase(1, "alpha1.p")? * k1[(a, b)];
            }
            if xk == xl && yk != yl {
                h[(k, l)] -= real_phase(3, "alpha2.p")? * ops.sigma_n2[(a, b)];
                g[(k, l)] -= real_phase(1, "alpha2.p")? * k2[(a, b)];
            }
            if xk == xl && yk == yl && a == b {
                let ph = real_phase(0, "beta")?;
                let s1 = 1.0 - 2.0 * xk as f64;
                let s2 = 1.0 - 2.0 * yk as f64;
                for (w, m) in words.iter_mut() {
                    let v = match w {
                        DiracWord::One => 1.0,
                        DiracWord::Beta1 => s1,
                        DiracWord::Beta2 => s2,
                        DiracWord::Beta1Beta2 => s1 * s2,
                        _ => continue,
                    };
                    m[(k, l)] += ph * v;
                }
            }
            if xk != xl && yk != yl {
                let ph = real_phase(0, "alpha1.alpha2")?;
                for (w, m) in words.iter_mut() {
                    match w {
                        DiracWord::Alpha1Alpha2 => m[(k, l)] += ph * ops.sigma12[(a, b)],
                        DiracWord::AlphaN1AlphaN2 => m[(k, l)] += ph * ops.sigma_nn[(a, b)],
                        _ => {}
                    }
                }
            }
        }
    }

    let mass = DVector::from_iterator(
        n,
        sections.iter().map(|s| {
            let (x, y) = s.block.indices();
            (1.0 - 2.0 * x as f64) * m1 + (1.0 - 2.0 * y as f64) * m2
        }),
    );

    let mut potential: Vec<(i32, DMatrix<f64>)> = Vec::new();
    for st in structures {
        for &(word, coef, usage) in st.kind.words() {
            let wm = &words.iter().find(|(w, _)| *w == word).expect("word built").1;
            let profile = match usage {
                ProfileUse::Value => st.profile.clone(),
                ProfileUse::RTimesDerivative => st.profile.r_derivative(),
            };
            for &(k, c) in &profile.terms {
                let term = wm * (coef * c);
                match potential.iter_mut().find(|(p, _)| *p == k) {
                    Some((_, m)) => *m += term,
                    None => potential.push((k, term)),
                }
            }
        }
    }
    potential.sort_by_key(|t| t.0);

    Ok(RadialSystem { j, sector, sections, h, g, mass, words, potential })
}
