use dirac2b::angular_algebra::{build_radial_system, RadialProfile, RadialSystem, Sector, SpinStructure, StructureKind};
use dirac2b::reduction_chain::{split_system, ChannelFunctions, PoleGrid, SingularKind};
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::sync::Arc;

fn funnel() -> RadialProfile {
    RadialProfile::linear(0.27).add(&RadialProfile::coulomb(0.27))
}

fn system(kind: StructureKind, m1: f64, m2: f64, j: u32, sector: Sector) -> RadialSystem {
    build_radial_system(&[SpinStructure::new(kind, funnel())], m1, m2, j, sector).unwrap()
}

fn asym(m: &DMatrix<f64>) -> f64 {
    (m + m.transpose()).abs().max()
}

fn sym_defect(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

fn rank(m: &DMatrix<f64>) -> usize {
    m.clone().svd(false, false).singular_values.iter().filter(|&&s| s > 1e-8).count()
}

#[test]
fn every_structure_and_sector_up_to_j12() {
    for kind in StructureKind::ALL {
        for sector in Sector::BOTH {
            for j in 0..=12u32 {
                let sys = system(kind, 0.3, 0.7, j, sector);
                assert!(asym(&sys.h) <= 1e-12, "{} j={j}", kind.name());
                for r in [0.5, 2.0] {
                    assert!(sym_defect(&sys.v(r, 1.7)) <= 1e-12, "{} j={j} r={r}", kind.name());
                }
                let expect = if j == 0 { 2 } else { 4 };
                assert_eq!(rank(&sys.h), expect, "{} j={j} {}", kind.name(), sector.name());
                assert_eq!(sys.dim(), if j == 0 { 4 } else { 8 });
            }
        }
    }
}

#[test]
fn harmonics_are_unit_normalized() {
    for sector in Sector::BOTH {
        for j in 0..=12u32 {
            let sys = system(StructureKind::ScalarYukawa, 0.0, 0.0, j, sector);
            for s in &sys.sections {
                assert!((s.norm_squared() - 1.0).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn free_system_has_zero_potential() {
    let sys = build_radial_system(&[], 1.0, 2.0, 5, Sector::EqualOrbital).unwrap();
    assert_eq!(sys.potential(1.3).abs().max(), 0.0);
}

#[test]
fn yukawa_linear_potential_is_r_times_constant() {
    let sys =
        build_radial_system(&[SpinStructure::new(StructureKind::ScalarYukawa, RadialProfile::linear(0.5))], 0.0, 0.0, 4, Sector::EqualOrbital)
            .unwrap();
    let u1 = sys.potential(1.0);
    let u3 = sys.potential(3.0);
    assert!((u3 - &u1 * 3.0).abs().max() < 1e-13);
    assert!(u1.abs().max() > 0.1);
}

#[test]
fn small_scalar_channels_have_negligible_z() {
    for kind in [StructureKind::ScalarYukawa, StructureKind::ScalarMinimal] {
        let sys = build_radial_system(&[SpinStructure::new(kind, RadialProfile::linear(1.0))], 0.0, 0.0, 64, Sector::EqualOrbital).unwrap();
        let funcs = ChannelFunctions::new(Arc::new(split_system(sys).unwrap()));
        for r in [4.0, 8.0, 12.0] {
            let z = funcs.z(r, 30.0).unwrap();
            let w = funcs.w(r, 30.0).unwrap();
            assert!(z.abs() < 1e-10 * w.abs().max(), "{} z={z}", kind.name());
        }
    }
}

/// Pole report against an independent fine-grid sign scan and bisection of det V22.
#[test]
fn pole_report_matches_det_bisection() {
    let sys = build_radial_system(&[SpinStructure::new(StructureKind::VectorGaunt, RadialProfile::linear(0.27))], 1.0, 1.0, 8, Sector::EqualOrbital)
        .unwrap();
    let split = Arc::new(split_system(sys).unwrap());
    let energy = 2.0;
    let grid = PoleGrid { r_min: 0.1, r_max: 10.0, points: 2048 };
    let found: Vec<f64> = ChannelFunctions::new(split.clone())
        .pole_report(energy, &grid)
        .into_iter()
        .filter(|p| p.kind == SingularKind::AlgebraicBlock)
        .map(|p| p.r)
        .collect();
    let mut oracle = Vec::new();
    let n = 20000;
    let rs: Vec<f64> = (0..=n).map(|i| 0.1 + 9.9 * i as f64 / n as f64).collect();
    for w in rs.windows(2) {
        let (d0, d1) = (split.det_v22(w[0], energy), split.det_v22(w[1], energy));
        if (d0 > 0.0) != (d1 > 0.0) {
            let (mut lo, mut hi) = (w[0], w[1]);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if (split.det_v22(mid, energy) > 0.0) == (d0 > 0.0) {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            oracle.push(0.5 * (lo + hi));
        }
    }
    assert!(!oracle.is_empty());
    assert_eq!(found.len(), oracle.len());
    for (a, b) in found.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
    }
}

fn any_kind() -> impl Strategy<Value = StructureKind> {
    (0..StructureKind::ALL.len()).prop_map(|i| StructureKind::ALL[i])
}

fn any_sector() -> impl Strategy<Value = Sector> {
    prop_oneof![Just(Sector::EqualOrbital), Just(Sector::ShiftedOrbital)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn radial_system_invariants(kind in any_kind(), sector in any_sector(), j in 1u32..=12,
                                m1 in 0.0f64..3.0, m2 in 0.0f64..3.0, r in 0.05f64..20.0, e in -5.0f64..5.0) {
        let sys = system(kind, m1, m2, j, sector);
        prop_assert!(asym(&sys.h) <= 1e-12);
        prop_assert!(sym_defect(&sys.v(r, e)) <= 1e-12);
        prop_assert_eq!(rank(&sys.h), 4);
    }

    #[test]
    fn split_is_orthogonal_with_symplectic_form(kind in any_kind(), sector in any_sector(), j in 0u32..=12) {
        let split = split_system(system(kind, 0.5, 0.5, j, sector)).unwrap();
        let (orth, form) = split.defects();
        prop_assert!(orth <= 1e-12);
        prop_assert!(form <= 1e-10);
        prop_assert_eq!(split.channel_count(), if j == 0 { 1 } else { 2 });
    }

    #[test]
    fn channel_matrix_is_symmetric(kind in prop_oneof![Just(StructureKind::ScalarYukawa), Just(StructureKind::ScalarMinimal),
                                                      Just(StructureKind::ScalarHalfSum), Just(StructureKind::ScalarProjector)],
                                   sector in any_sector(), j in 2u32..=40, r in 0.5f64..6.0) {
        let sys = build_radial_system(&[SpinStructure::new(kind, RadialProfile::linear(1.0))], 0.0, 0.0, j, sector).unwrap();
        let funcs = ChannelFunctions::new(Arc::new(split_system(sys).unwrap()));
        let w = funcs.w(r, 3.0 * f64::from(j).sqrt()).unwrap();
        prop_assert!(sym_defect(&w) <= 1e-9 * w.abs().max().max(1.0));
    }
}
