//! Spin-angular operators in the product basis and their matrix elements
//! between harmonics.
//!
//! Spherical components: `sigma_{+1} = -sqrt2 |up><dn|`, `sigma_0 = sigma_z`,
//! `sigma_{-1} = sqrt2 |dn><up|`, and `a.b = sum_q (-1)^q a_q b_{-q}`.
//! The unit vector acts on the orbital part through
//! `<l' m'| n_q |l m> = sqrt((2l+1)/(2l'+1)) <l 0 1 0|l' 0> <l m 1 q|l' m'>`.

use nalgebra::DMatrix;

use super::clebsch::clebsch_gordan;
use super::harmonics::{harmonic_rows, AngularBasis, AngularState, DiracBlock, HarmonicLabel};
use super::AngularError;

/// Operator words accepted by [`matrix_element`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorWord {
    Identity,
    Beta1,
    Beta2,
    SigmaN1,
    SigmaN2,
    Sigma1Sigma2,
    SigmaN1SigmaN2,
    SigmaL1,
    SigmaL2,
}

impl OperatorWord {
    pub const ALL: [OperatorWord; 9] = [
        OperatorWord::Identity,
        OperatorWord::Beta1,
        OperatorWord::Beta2,
        OperatorWord::SigmaN1,
        OperatorWord::SigmaN2,
        OperatorWord::Sigma1Sigma2,
        OperatorWord::SigmaN1SigmaN2,
        OperatorWord::SigmaL1,
        OperatorWord::SigmaL2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorWord::Identity => "1",
            OperatorWord::Beta1 => "beta1",
            OperatorWord::Beta2 => "beta2",
            OperatorWord::SigmaN1 => "sigma1.n",
            OperatorWord::SigmaN2 => "sigma2.n",
            OperatorWord::Sigma1Sigma2 => "sigma1.sigma2",
            OperatorWord::SigmaN1SigmaN2 => "(sigma1.n)(sigma2.n)",
            OperatorWord::SigmaL1 => "sigma1.L",
            OperatorWord::SigmaL2 => "sigma2.L",
        }
    }

    pub fn parse(s: &str) -> Result<Self, AngularError> {
        OperatorWord::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| AngularError::UnsupportedOperator(s.to_string()))
    }
}

fn spin_q(two_out: i32, two_in: i32, q: i32) -> f64 {
    match q {
        0 if two_out == two_in => f64::from(two_in),
        1 if two_out == 1 && two_in == -1 => -std::f64::consts::SQRT_2,
        -1 if two_out == -1 && two_in == 1 => std::f64::consts::SQRT_2,
        _ => 0.0,
    }
}

fn unit_vector_q(l_out: u32, m_out: i64, l_in: u32, m_in: i64, q: i64) -> f64 {
    if m_out != m_in + q || (i64::from(l_out) - i64::from(l_in)).abs() != 1 {
        return 0.0;
    }
    let (lo, li) = (2 * l_out as i32, 2 * l_in as i32);
    let reduced = clebsch_gordan(li, 0, 2, 0, lo, 0).unwrap_or(0.0);
    let coupling = clebsch_gordan(li, 2 * m_in as i32, 2, 2 * q as i32, lo, 2 * m_out as i32).unwrap_or(0.0);
    (f64::from(2 * l_in + 1) / f64::from(2 * l_out + 1)).sqrt() * reduced * coupling
}

/// sigma.L restricted to equal l, acting on one spin.
fn spin_orbit(l: u32, m_out: i64, two_out: i32, m_in: i64, two_in: i32) -> f64 {
    let lf = f64::from(l);
    let (mo, mi) = (m_out as f64, m_in as f64);
    let mut v = 0.0;
    if two_out == two_in && m_out == m_in {
        v += f64::from(two_in) * mi;
    }
    // |up><dn| L_-  and  |dn><up| L_+
    if two_out == 1 && two_in == -1 && m_out == m_in - 1 {
        v += (lf * (lf + 1.0) - mi * mo).sqrt();
    }
    if two_out == -1 && two_in == 1 && m_out == m_in + 1 {
        v += (lf * (lf + 1.0) - mi * mo).sqrt();
    }
    v
}

/// Operator matrices over the product basis at fixed `j`.
#[derive(Debug, Clone)]
pub struct BasisOperators {
    pub basis: AngularBasis,
    pub sigma_n1: DMatrix<f64>,
    pub sigma_n2: DMatrix<f64>,
    pub sigma_l1: DMatrix<f64>,
    pub sigma_l2: DMatrix<f64>,
    pub sigma12: DMatrix<f64>,
}

impl BasisOperators {
    pub fn new(j: u32) -> Self {
        let basis = AngularBasis::new(j);
        let n = basis.len();
        let mut sn1 = DMatrix::zeros(n, n);
        let mut sn2 = DMatrix::zeros(n, n);
        let mut sl1 = DMatrix::zeros(n, n);
        let mut sl2 = DMatrix::zeros(n, n);
        let mut ss = DMatrix::zeros(n, n);
        for (a, out) in basis.states.iter().enumerate() {
            for (b, inp) in basis.states.iter().enumerate() {
                for q in -1..=1i32 {
                    let sign = if q == 0 { 1.0 } else { -1.0 };
                    let n_part = unit_vector_q(out.l, out.ml, inp.l, inp.ml, -i64::from(q));
                    if n_part == 0.0 {
                        continue;
                    }
                    if out.two_m2 == inp.two_m2 {
                        sn1[(a, b)] += sign * spin_q(out.two_m1, inp.two_m1, q) * n_part;
                    }
                    if out.two_m1 == inp.two_m1 {
                        sn2[(a, b)] += sign * spin_q(out.two_m2, inp.two_m2, q) * n_part;
                    }
                }
                if out.l == inp.l {
                    if out.two_m2 == inp.two_m2 {
                        sl1[(a, b)] += spin_orbit(out.l, out.ml, out.two_m1, inp.ml, inp.two_m1);
                    }
                    if out.two_m1 == inp.two_m1 {
                        sl2[(a, b)] += spin_orbit(out.l, out.ml, out.two_m2, inp.ml, inp.two_m2);
                    }
                    if out.ml == inp.ml {
                        if out.two_m1 == inp.two_m1 && out.two_m2 == inp.two_m2 {
                            ss[(a, b)] += f64::from(inp.two_m1 * inp.two_m2);
                        }
                        if out.two_m1 == -inp.two_m1 && out.two_m2 == -inp.two_m2 && inp.two_m1 == -inp.two_m2 {
                            ss[(a, b)] += 2.0;
                        }
                    }
                }
            }
        }
        BasisOperators { basis, sigma_n1: sn1, sigma_n2: sn2, sigma_l1: sl1, sigma_l2: sl2, sigma12: ss }
    }

    /// Spin-angular part of a word; beta words act as the identity here.
    fn apply(&self, word: OperatorWord, v: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        match word {
            OperatorWord::Identity | OperatorWord::Beta1 | OperatorWord::Beta2 => v.clone(),
            OperatorWord::SigmaN1 => &self.sigma_n1 * v,
            OperatorWord::SigmaN2 => &self.sigma_n2 * v,
            OperatorWord::Sigma1Sigma2 => &self.sigma12 * v,
            // exact on harmonics: sigma2.n maps a |j j> state into the basis span
            OperatorWord::SigmaN1SigmaN2 => &self.sigma_n1 * (&self.sigma_n2 * v),
            OperatorWord::SigmaL1 => &self.sigma_l1 * v,
            OperatorWord::SigmaL2 => &self.sigma_l2 * v,
        }
    }
}

fn block_sign(word: OperatorWord, block: DiracBlock) -> f64 {
    let (x, y) = block.indices();
    match word {
        OperatorWord::Beta1 => 1.0 - 2.0 * x as f64,
        OperatorWord::Beta2 => 1.0 - 2.0 * y as f64,
        _ => 1.0,
    }
}

/// `<bra| word |ket>` over the angular and spin variables.
///
/// The beta words also see the Dirac block: they vanish between different
/// blocks and carry the large (+1) / small (-1) sign otherwise. All other
/// words act on spin and angle only.
pub fn matrix_element(word: OperatorWord, bra: &AngularState, ket: &AngularState) -> Result<f64, AngularError> {
    if bra.j != ket.j {
        return Err(AngularError::InvalidArgument(format!(
            "bra j={} and ket j={} differ",
            bra.j, ket.j
        )));
    }
    if matches!(word, OperatorWord::Beta1 | OperatorWord::Beta2) && bra.block != ket.block {
        return Ok(0.0);
    }
    let ops = BasisOperators::new(bra.j);
    let kv = ket.dense(&ops.basis);
    let bv = bra.dense(&ops.basis);
    Ok(block_sign(word, ket.block) * bv.dot(&ops.apply(word, &kv)))
}

/// Angular words projected onto the harmonics of one `j`, indexed by
/// `labels` (A, 0, -, + with absent ones dropped at j = 0).
#[derive(Debug, Clone)]
pub struct ProjectedOperators {
    pub labels: Vec<HarmonicLabel>,
    pub sigma_n1: DMatrix<f64>,
    pub sigma_n2: DMatrix<f64>,
    pub sigma_l1: DMatrix<f64>,
    pub sigma_l2: DMatrix<f64>,
    pub sigma12: DMatrix<f64>,
    pub sigma_nn: DMatrix<f64>,
}

impl ProjectedOperators {
    /// Projects and checks closure: each word must map the harmonic span into itself.
    pub fn new(j: u32) -> Result<Self, AngularError> {
        let ops = BasisOperators::new(j);
        let (labels, rows) = harmonic_rows(j, &ops.basis)?;
        let cols = rows.transpose();
        let project = |name: &'static str, m: &DMatrix<f64>| -> Result<DMatrix<f64>, AngularError> {
            let image = m * &cols;
            let proj = &rows * &image;
            let residual = (&image - &cols * &proj).abs().max();
            let scale = 1.0 + m.abs().max();
            if residual > 1e-12 * scale {
                return Err(AngularError::NonClosure { word: name, residual });
            }
            Ok(proj)
        };
        let sigma_n1 = project("sigma1.n", &ops.sigma_n1)?;
        let sigma_n2 = project("sigma2.n", &ops.sigma_n2)?;
        let sigma_l1 = project("sigma1.L", &ops.sigma_l1)?;
        let sigma_l2 = project("sigma2.L", &ops.sigma_l2)?;
        let sigma12 = project("sigma1.sigma2", &ops.sigma12)?;
        let sigma_nn = &sigma_n1 * &sigma_n2;
        Ok(ProjectedOperators { labels, sigma_n1, sigma_n2, sigma_l1, sigma_l2, sigma12, sigma_nn })
    }

    pub fn index(&self, label: HarmonicLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }
}
