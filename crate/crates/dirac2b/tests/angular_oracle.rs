//! Angular matrix elements against brute-force quadrature over the sphere.

mod common;

use common::sphere::quadrature;
use dirac2b::angular_algebra::{
    build_harmonics, clebsch_gordan, matrix_element, AngularState, DiracBlock, HarmonicLabel, OperatorWord, Sector,
};
use nalgebra::{DMatrix, SymmetricEigen};

#[test]
fn matrix_elements_match_sphere_quadrature() {
    let mut checked = 0;
    let mut worst = 0.0f64;
    for j in 0..=12u32 {
        let mut states = build_harmonics(j, Sector::EqualOrbital).unwrap();
        states.extend(build_harmonics(j, Sector::ShiftedOrbital).unwrap());
        // one representative per label within the large-large and small-large blocks
        let reps: Vec<&AngularState> = states
            .iter()
            .filter(|s| matches!(s.block, DiracBlock::LargeLarge | DiracBlock::SmallLarge))
            .collect();
        for word in OperatorWord::ALL {
            for bra in &reps {
                for ket in &reps {
                    let exact = matrix_element(word, bra, ket).unwrap();
                    let oracle = quadrature(word, bra, ket);
                    worst = worst.max((exact - oracle).abs());
                    assert!(
                        (exact - oracle).abs() < 1e-10,
                        "j={j} {} <{}|{}|{}>: {exact} vs {oracle}",
                        word.name(),
                        bra.label.symbol(),
                        word.name(),
                        ket.label.symbol()
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000, "only {checked} elements");
    eprintln!("checked {checked} elements, worst deviation {worst:e}");
}

#[test]
fn sigma_n_sigma_n_at_j1_between_shifted_triplets() {
    let states = build_harmonics(1, Sector::ShiftedOrbital).unwrap();
    let minus = states.iter().find(|s| s.label == HarmonicLabel::TripletAbove).unwrap();
    let plus = states.iter().find(|s| s.label == HarmonicLabel::TripletBelow).unwrap();
    let exact = matrix_element(OperatorWord::SigmaN1SigmaN2, minus, plus).unwrap();
    assert!((exact - quadrature(OperatorWord::SigmaN1SigmaN2, minus, plus)).abs() < 1e-10);
    assert!(exact.abs() > 0.1, "element should not vanish: {exact}");
}

#[test]
fn parity_even_words_do_not_mix_orbital_parity() {
    for j in 1..=6u32 {
        let eq = build_harmonics(j, Sector::EqualOrbital).unwrap();
        let sh = build_harmonics(j, Sector::ShiftedOrbital).unwrap();
        for bra in eq.iter().filter(|s| s.block == DiracBlock::LargeLarge) {
            for ket in sh.iter().filter(|s| s.block == DiracBlock::LargeLarge) {
                for word in [OperatorWord::Identity, OperatorWord::Sigma1Sigma2, OperatorWord::SigmaL1, OperatorWord::SigmaN1SigmaN2] {
                    assert!(matrix_element(word, bra, ket).unwrap().abs() < 1e-14, "{} j={j}", word.name());
                }
            }
        }
    }
}

/// `J^2` in the product basis of two spin-1 states, diagonalized numerically.
#[test]
fn clebsch_one_one_to_two_from_j_squared() {
    let ms = [1i32, 0, -1];
    let idx = |a: i32, b: i32| 3 * ms.iter().position(|&m| m == a).unwrap() + ms.iter().position(|&m| m == b).unwrap();
    let lower = |m: i32| -> f64 { (2.0 - f64::from(m) * f64::from(m - 1)).sqrt() };
    let raise = |m: i32| -> f64 { (2.0 - f64::from(m) * f64::from(m + 1)).sqrt() };
    let mut j2 = DMatrix::<f64>::zeros(9, 9);
    for &a in &ms {
        for &b in &ms {
            let col = idx(a, b);
            // J^2 = J1^2 + J2^2 + 2 J1z J2z + J1+ J2- + J1- J2+
            j2[(col, col)] += 4.0;
            if a < 1 && b > -1 {
                j2[(idx(a + 1, b - 1), col)] += raise(a) * lower(b);
            }
            if a > -1 && b < 1 {
                j2[(idx(a - 1, b + 1), col)] += lower(a) * raise(b);
            }
            j2[(col, col)] += 2.0 * f64::from(a * b);
        }
    }
    // restrict to M = 1: states (1,0), (0,1)
    let sub = DMatrix::from_fn(2, 2, |r, c| {
        let rows = [idx(1, 0), idx(0, 1)];
        j2[(rows[r], rows[c])]
    });
    let eig = SymmetricEigen::new(sub);
    let k = eig.eigenvalues.iter().position(|&v| (v - 6.0).abs() < 1e-12).expect("J=2 eigenvalue");
    let v = eig.eigenvectors.column(k);
    let cg = clebsch_gordan(2, 2, 2, 0, 4, 2).unwrap();
    assert!((cg.abs() - v[0].abs()).abs() < 1e-14);
    assert!((cg - 0.5f64.sqrt()).abs() < 1e-14);
}

/// Closed Racah form for two spin halves coupled to zero.
#[test]
fn clebsch_singlet_from_racah() {
    let racah = |m1: f64| {
        // <1/2 m1 1/2 -m1|0 0> = (-1)^(1/2 - m1) / sqrt(2)
        if m1 > 0.0 {
            1.0 / 2f64.sqrt()
        } else {
            -1.0 / 2f64.sqrt()
        }
    };
    assert!((clebsch_gordan(1, 1, 1, -1, 0, 0).unwrap() - racah(0.5)).abs() < 1e-15);
    assert!((clebsch_gordan(1, -1, 1, 1, 0, 0).unwrap() - racah(-0.5)).abs() < 1e-15);
}

#[test]
fn coupling_to_zero_is_unity() {
    for two_j in 0..20 {
        for two_m in (-two_j..=two_j).step_by(2) {
            assert_eq!(clebsch_gordan(two_j, two_m, 0, 0, two_j, two_m).unwrap(), 1.0);
        }
    }
}

#[test]
fn malformed_quantum_numbers_rejected() {
    assert!(clebsch_gordan(-2, 0, 2, 0, 2, 0).is_err());
    assert!(clebsch_gordan(2, 4, 2, 0, 2, 0).is_err());
}
