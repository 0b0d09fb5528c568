use dirac2b::coupled_solver::{
    classify_coupling, diagonalize, solve, solve_coupled, ChannelSource, CouplingCase, SolverOptions,
};
use dirac2b::quasipotential_core::QuasiError;
use nalgebra::Matrix2;
use proptest::prelude::*;

#[derive(Clone, Copy)]
enum Extra {
    /// `r` added to the oscillator.
    Linear,
    /// `r²` replaced by `r`.
    PureLinear,
    Constant(f64),
}

/// Diagonal entries are oscillator-like `r² + L/r² − b` plus an extra term; constant coupling `y`.
struct Synthetic {
    first: Extra,
    second: Extra,
    y: f64,
}

fn entry(extra: Extra, r: f64, b: f64, l2: f64) -> [f64; 3] {
    let cent = [l2 / (r * r), -2.0 * l2 / r.powi(3), 6.0 * l2 / r.powi(4)];
    let body = match extra {
        Extra::Linear => [r * r + r, 2.0 * r + 1.0, 2.0],
        Extra::PureLinear => [r, 1.0, 0.0],
        Extra::Constant(c) => [r * r + c, 2.0 * r, 2.0],
    };
    [body[0] + cent[0] - b, body[1] + cent[1], body[2] + cent[2]]
}

impl ChannelSource for Synthetic {
    fn matrix_jet(&self, r: f64, b: f64, index: u32) -> Result<[Matrix2<f64>; 3], QuasiError> {
        let l2 = f64::from(index) * f64::from(index + 1);
        let w1 = entry(self.first, r, b, l2);
        let w2 = entry(self.second, r, b, l2);
        let y = [self.y, 0.0, 0.0];
        Ok([0, 1, 2].map(|k| Matrix2::new(w1[k], y[k], y[k], w2[k])))
    }

    fn scale_hint(&self, index: u32) -> Option<(f64, f64)> {
        let l = f64::from(index);
        Some((l.sqrt(), 2.0 * l))
    }
}

fn classify(src: &Synthetic) -> CouplingCase {
    classify_coupling(src, &SolverOptions::default()).unwrap().case
}

#[test]
fn different_asymptotics_is_case1() {
    let src = Synthetic { first: Extra::Constant(0.0), second: Extra::PureLinear, y: 0.3 };
    assert_eq!(classify(&src), CouplingCase::Case1);
}

#[test]
fn first_order_orbit_split_is_case2() {
    let src = Synthetic { first: Extra::Constant(0.0), second: Extra::Linear, y: 0.3 };
    let class = classify_coupling(&src, &SolverOptions::default()).unwrap();
    assert_eq!(class.case, CouplingCase::Case2);
    assert!((class.rho_order.unwrap() - 1.0).abs() < 0.1);
}

#[test]
fn constant_offset_is_case3() {
    let src = Synthetic { first: Extra::Constant(0.0), second: Extra::Constant(0.5), y: 0.3 };
    let class = classify_coupling(&src, &SolverOptions::default()).unwrap();
    assert_eq!(class.case, CouplingCase::Case3);
    let osc = solve_coupled(&src, &class, &SolverOptions::default()).unwrap();
    assert!((osc.kappa - 2.0).abs() < 1e-6 && (osc.omega2 - 4.0).abs() < 1e-6);
    assert!(osc.chi.abs() > 1e-3);
    let sum = osc.nu[0] + osc.nu[1];
    let det = osc.nu[0] * osc.nu[1] - osc.chi * osc.chi;
    assert!((osc.nu_tilde[0] + osc.nu_tilde[1] - sum).abs() <= 1e-10 * sum.abs().max(1.0));
    assert!((osc.nu_tilde[0] * osc.nu_tilde[1] - det).abs() <= 1e-10 * det.abs().max(1.0));
}

#[test]
fn case3_relabel_swaps_mixing_components() {
    let opts = SolverOptions::default();
    let ab = Synthetic { first: Extra::Constant(0.0), second: Extra::Constant(0.5), y: 0.3 };
    let ba = Synthetic { first: Extra::Constant(0.5), second: Extra::Constant(0.0), y: 0.3 };
    let o1 = solve_coupled(&ab, &classify_coupling(&ab, &opts).unwrap(), &opts).unwrap();
    let o2 = solve_coupled(&ba, &classify_coupling(&ba, &opts).unwrap(), &opts).unwrap();
    for i in 0..2 {
        assert!((o1.nu_tilde[i] - o2.nu_tilde[i]).abs() < 1e-8);
        assert!((o1.mixing[i][0].abs() - o2.mixing[i][1].abs()).abs() < 1e-6);
        assert!((o1.mixing[i][1].abs() - o2.mixing[i][0].abs()).abs() < 1e-6);
    }
}

#[test]
fn degenerate_channels_mix_equally() {
    let (vals, vecs) = diagonalize(1.5, 1.5, 0.25);
    assert_eq!(vals, [1.75, 1.25]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((vecs[0][0] - h).abs() < 1e-15 && (vecs[0][1] - h).abs() < 1e-15);
    assert!((vecs[1][0].abs() - h).abs() < 1e-15 && (vecs[1][0] + vecs[1][1]).abs() < 1e-15);

    let src = Synthetic { first: Extra::Constant(0.2), second: Extra::Constant(0.2), y: 0.3 };
    let opts = SolverOptions::default();
    let osc = solve_coupled(&src, &classify_coupling(&src, &opts).unwrap(), &opts).unwrap();
    for m in osc.mixing {
        assert!((m[0].abs() - h).abs() < 1e-8 && (m[1].abs() - h).abs() < 1e-8);
    }
}

#[test]
fn decoupled_cases_ignore_coupling_strength() {
    let opts = SolverOptions::default();
    for (first, second) in [(Extra::Constant(0.0), Extra::PureLinear), (Extra::Constant(0.0), Extra::Linear)] {
        let weak = Synthetic { first, second, y: 0.3 };
        let strong = Synthetic { first, second, y: 2.1 };
        let bw = solve(&weak, &classify_coupling(&weak, &opts).unwrap(), &opts).unwrap();
        let bs = solve(&strong, &classify_coupling(&strong, &opts).unwrap(), &opts).unwrap();
        assert_eq!(bw, bs);
    }
}

#[test]
fn coupled_case_rejected_by_decoupled_path() {
    let src = Synthetic { first: Extra::Constant(0.0), second: Extra::PureLinear, y: 0.0 };
    let opts = SolverOptions::default();
    let class = classify_coupling(&src, &opts).unwrap();
    assert!(solve_coupled(&src, &class, &opts).is_err());
}

proptest! {
    #[test]
    fn nu_tilde_trace_and_determinant(nu1 in -10.0f64..10.0, nu2 in -10.0f64..10.0, chi in -10.0f64..10.0) {
        let (v, m) = diagonalize(nu1, nu2, chi);
        let scale = nu1.abs().max(nu2.abs()).max(chi.abs()).max(1.0);
        prop_assert!((v[0] + v[1] - (nu1 + nu2)).abs() <= 1e-10 * scale);
        prop_assert!((v[0] * v[1] - (nu1 * nu2 - chi * chi)).abs() <= 1e-10 * scale * scale);
        prop_assert!(v[0] >= v[1]);
        for i in 0..2 {
            let (x, y) = (m[i][0], m[i][1]);
            prop_assert!((x.hypot(y) - 1.0).abs() <= 1e-12);
            prop_assert!((nu1 * x + chi * y - v[i] * x).abs() <= 1e-9 * scale);
            prop_assert!((chi * x + nu2 * y - v[i] * y).abs() <= 1e-9 * scale);
        }
        prop_assert!((m[0][0] * m[1][0] + m[0][1] * m[1][1]).abs() <= 1e-9);
    }
}
