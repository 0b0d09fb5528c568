//! From the first-order radial system to the 2x2 second-order channel form
//! `psi'' - W psi - {Z, d/dr} J psi = 0`.
//!
//! An orthogonal `O` puts `H` into the form `2 diag(J, 0)`, the algebraic
//! rows are eliminated (`Vperp = (V11 - V12 V22^-1 V21) / 2`), and the
//! derivative half of the remaining 4-vector is eliminated in turn. The
//! result is rescaled by `sqrt` of the (diagonal) eliminated block.

pub mod jet;

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::angular_algebra::{AngularError, HarmonicLabel, RadialSystem};
use jet::{diag_jet, MatJet, ScalarJet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Angular(#[from] AngularError),
    #[error("split structure error: {0}")]
    Structure(String),
    #[error("singular algebraic block at r={r}, E={energy}")]
    Pole { r: f64, energy: f64 },
    #[error("eliminated 2x2 block is not diagonal at r={r}, E={energy} (relative off-diagonal {offdiag:e})")]
    UnsupportedStructure { r: f64, energy: f64, offdiag: f64 },
    #[error("eliminated block has mixed signs at r={r}, E={energy}: {entries:?}")]
    Branch { r: f64, energy: f64, entries: Vec<f64> },
}

/// `O`, with rows ordered as (differential pairs a_i, partners b_i, null space).
#[derive(Debug, Clone)]
pub struct SplitSystem {
    pub system: RadialSystem,
    pub o: DMatrix<f64>,
    /// Rank of `H`; the first `rank` rows of `O` span the differential part.
    pub rank: usize,
}

/// Pivoted Gram-Schmidt on the columns of `m` listed in `cols`.
/// Ties within a relative 1e-9 go to the lowest index.
fn pivoted_gram_schmidt(m: &DMatrix<f64>, cols: &[usize], tol: f64) -> Vec<nalgebra::DVector<f64>> {
    let mut work: Vec<nalgebra::DVector<f64>> = cols.iter().map(|&c| m.column(c).into_owned()).collect();
    let mut out = Vec::new();
    loop {
        let norms: Vec<f64> = work.iter().map(|v| v.norm()).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        if max < tol {
            break;
        }
        let pick = norms.iter().position(|&n| n >= (1.0 - 1e-9) * max).expect("max exists");
        let q = &work[pick] / norms[pick];
        for v in work.iter_mut() {
            let c = q.dot(v);
            *v -= &q * c;
        }
        out.push(q);
    }
    out
}

pub fn split_system(system: RadialSystem) -> Result<SplitSystem, ReductionError> {
    let n = system.dim();
    let expected = if system.j == 0 { 2 } else { 4 };
    let h = &system.h;
    let svd = h.clone().svd(false, false);
    let smax = svd.singular_values.max().max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-8 * smax).count();
    if rank != expected {
        return Err(ReductionError::Structure(format!("rank(H) = {rank}, expected {expected}")));
    }
    let p = -(h * h) / 4.0;
    let idem = (&p * &p - &p).abs().max();
    if idem > 1e-10 {
        return Err(ReductionError::Structure(format!("-H^2/4 is not a projector (defect {idem:e})")));
    }
    let candidates: Vec<usize> = system
        .sections
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.label, HarmonicLabel::Singlet | HarmonicLabel::TripletEqual))
        .map(|(i, _)| i)
        .collect();
    let firsts = pivoted_gram_schmidt(&p, &candidates, 1e-8);
    if 2 * firsts.len() != rank {
        return Err(ReductionError::Structure(format!(
            "range of H not generated from the l = j sections ({} pairs for rank {rank})",
            firsts.len()
        )));
    }
    let partners: Vec<_> = firsts.iter().map(|a| -(h * a) / 2.0).collect();
    let complement = DMatrix::<f64>::identity(n, n) - &p;
    let nulls = pivoted_gram_schmidt(&complement, &(0..n).collect::<Vec<_>>(), 1e-8);
    if nulls.len() != n - rank {
        return Err(ReductionError::Structure(format!("null space dimension {} != {}", nulls.len(), n - rank)));
    }
    let rows: Vec<_> = firsts.iter().chain(partners.iter()).chain(nulls.iter()).map(|v| v.transpose()).collect();
    let o = DMatrix::from_rows(&rows);
    let split = SplitSystem { system, o, rank };
    let (orth, form) = split.defects();
    if orth > 1e-12 || form > 1e-10 {
        return Err(ReductionError::Structure(format!("split defects: orthogonality {orth:e}, form {form:e}")));
    }
    Ok(split)
}

/// Derivative sequences of the channel functions at one `(r, E)`.
#[derive(Debug, Clone)]
pub struct ChannelJet {
    /// `W` (diagonal W1, W2, off-diagonal Y) and its r-derivatives.
    pub w: Vec<DMatrix<f64>>,
    pub z: f64,
    pub z_derivative: f64,
    /// Largest mismatch between the antisymmetric part of the zero-order
    /// coefficient and `-Z' J`, and the diagonal of the first-order one.
    pub form_defect: f64,
    /// Diagonal of the eliminated block before any overall sign flip.
    pub reduced_diag: Vec<f64>,
    pub flipped: bool,
    pub det_v22: f64,
}

impl SplitSystem {
    pub fn channel_count(&self) -> usize {
        self.rank / 2
    }

    /// (max |O^T O - I|, max |O H O^T - 2 diag(J, 0)|)
    pub fn defects(&self) -> (f64, f64) {
        let n = self.system.dim();
        let id = DMatrix::<f64>::identity(n, n);
        let orth = (self.o.transpose() * &self.o - &id).abs().max();
        let k = self.channel_count() * 2;
        let half = k / 2;
        let mut target = DMatrix::zeros(n, n);
        for i in 0..half {
            target[(i, half + i)] = 2.0;
            target[(half + i, i)] = -2.0;
        }
        let form = (&self.o * &self.system.h * self.o.transpose() - target).abs().max();
        (orth, form)
    }

    fn transformed(&self, r: f64, energy: f64, order: usize) -> MatJet {
        MatJet(self.system.v_derivatives(r, energy, order)).congruence(&self.o)
    }

    /// `(V11, V12, V21, V22)` of the transformed potential matrix.
    pub fn blocks(&self, r: f64, energy: f64) -> [DMatrix<f64>; 4] {
        let vt = self.transformed(r, energy, 0);
        let (k, n) = (self.rank, self.system.dim());
        let b = |rr: std::ops::Range<usize>, cc: std::ops::Range<usize>| vt.block(rr, cc).0.remove(0);
        [b(0..k, 0..k), b(0..k, k..n), b(k..n, 0..k), b(k..n, k..n)]
    }

    pub fn det_v22(&self, r: f64, energy: f64) -> f64 {
        let [_, _, _, v22] = self.blocks(r, energy);
        v22.determinant()
    }

    fn v22_singular(v22: &DMatrix<f64>) -> bool {
        let scale: f64 = v22.row_iter().map(|row| row.norm()).product();
        let det = v22.determinant();
        !(det.abs() > 1e-12 * scale)
    }

    fn reduced_jet(&self, r: f64, energy: f64, order: usize) -> Result<(MatJet, f64), ReductionError> {
        let vt = self.transformed(r, energy, order);
        let (k, n) = (self.rank, self.system.dim());
        let v11 = vt.block(0..k, 0..k);
        let v12 = vt.block(0..k, k..n);
        let v21 = vt.block(k..n, 0..k);
        let v22 = vt.block(k..n, k..n);
        if Self::v22_singular(v22.value()) {
            return Err(ReductionError::Pole { r, energy });
        }
        let det = v22.value().determinant();
        let inv = v22.inverse().ok_or(ReductionError::Pole { r, energy })?;
        Ok((v11.sub(&v12.mul(&inv).mul(&v21)).scale(0.5), det))
    }

    /// `Vperp(r, E)`, the 4x4 (2x2 at j = 0) reduced first-order matrix.
    pub fn first_order_reduced(&self, r: f64, energy: f64) -> Result<DMatrix<f64>, ReductionError> {
        Ok(self.reduced_jet(r, energy, 0)?.0 .0.remove(0))
    }

    /// Diagonal of the eliminated 2x2 block (before the sign flip).
    pub fn reduced_diag(&self, r: f64, energy: f64) -> Result<Vec<f64>, ReductionError> {
        let vp = self.first_order_reduced(r, energy)?;
        let c = self.channel_count();
        Ok((0..c).map(|i| vp[(c + i, c + i)]).collect())
    }

    /// Channel functions and their first `order` r-derivatives.
    pub fn channel_jet(&self, r: f64, energy: f64, order: usize) -> Result<ChannelJet, ReductionError> {
        let (vp, det_v22) = self.reduced_jet(r, energy, order + 2)?;
        let c = self.channel_count();
        let mut cc = vp.block(0..c, 0..c);
        let a = vp.block(0..c, c..2 * c);
        let b = vp.block(c..2 * c, 0..c);
        let mut d = vp.block(c..2 * c, c..2 * c);

        let d0 = d.value().clone();
        let diag: Vec<f64> = (0..c).map(|i| d0[(i, i)]).collect();
        let dmax = diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut off = 0.0f64;
        for i in 0..c {
            for k in 0..c {
                if i != k {
                    off = off.max(d0[(i, k)].abs());
                }
            }
        }
        if off > 1e-9 * dmax {
            return Err(ReductionError::UnsupportedStructure { r, energy, offdiag: off / dmax });
        }
        let flipped = if diag.iter().all(|&x| x > 0.0) {
            false
        } else if diag.iter().all(|&x| x < 0.0) {
            true
        } else {
            return Err(ReductionError::Branch { r, energy, entries: diag });
        };
        if flipped {
            d = d.neg();
            cc = cc.neg();
        }
        let entries: Vec<ScalarJet> = (0..c).map(|i| ScalarJet(d.0.iter().map(|m| m[(i, i)]).collect())).collect();
        let s = diag_jet(&entries.iter().map(|e| e.sqrt()).collect::<Vec<_>>());
        let p = diag_jet(&entries.iter().map(|e| e.recip()).collect::<Vec<_>>());
        let s1 = s.derivative();
        let s2 = s1.derivative();
        let pb = p.mul(&b);
        let x = p.derivative().sub(&pb).add(&a.mul(&p));
        let m1 = s.mul(&p.mul(&s1).scale(2.0).add(&x.mul(&s)));
        let inner = cc.sub(&pb.derivative()).sub(&a.mul(&pb));
        let m0 = s.mul(&p.mul(&s2).add(&x.mul(&s1)).add(&inner.mul(&s)));

        let w: Vec<DMatrix<f64>> = m0.0.iter().map(|m| -(m + m.transpose()) * 0.5).collect();
        let (z, z_derivative) = if c == 2 {
            (-m1.0[0][(0, 1)] / 2.0, -m1.0[1][(0, 1)] / 2.0)
        } else {
            (0.0, 0.0)
        };
        let mut form_defect = 0.0f64;
        for i in 0..c {
            form_defect = form_defect.max(m1.0[0][(i, i)].abs());
        }
        if c == 2 {
            let anti = (&m0.0[0] - m0.0[0].transpose()) * 0.5;
            // antisymmetric part of M0 is -Z' J with J = [[0, 1], [-1, 0]]
            form_defect = form_defect.max((anti[(0, 1)] + z_derivative).abs());
        }
        Ok(ChannelJet { w, z, z_derivative, form_defect, reduced_diag: diag, flipped, det_v22 })
    }

    /// Large-large harmonic weights of each channel: `weights[i][f]` for
    /// channel `i` and the two large-large sections `f` (s1, s2 order).
    pub fn large_large_weights(&self) -> Vec<[f64; 2]> {
        let c = self.channel_count();
        let ll: Vec<usize> = self
            .system
            .sections
            .iter()
            .enumerate()
            .filter(|(_, s)| s.block == crate::angular_algebra::DiracBlock::LargeLarge)
            .map(|(i, _)| i)
            .collect();
        (0..c)
            .map(|i| {
                let mut w = [0.0; 2];
                for (f, &idx) in ll.iter().enumerate().take(2) {
                    let a = self.o[(i, idx)];
                    let b = self.o[(c + i, idx)];
                    w[f] = a * a + b * b;
                }
                w
            })
            .collect()
    }

    /// Labels of the large-large sections, in the order of [`Self::large_large_weights`].
    pub fn large_large_labels(&self) -> Vec<HarmonicLabel> {
        self.system
            .sections
            .iter()
            .filter(|s| s.block == crate::angular_algebra::DiracBlock::LargeLarge)
            .map(|s| s.label)
            .collect()
    }
}

/// Kind of singular point found by [`ChannelFunctions::pole_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularKind {
    /// `det V22 = 0`
    AlgebraicBlock,
    /// Zero of one diagonal entry of the eliminated 2x2 block.
    EliminatedEntry(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPoint {
    pub r: f64,
    pub energy: f64,
    pub kind: SingularKind,
}

/// Log-spaced radial grid for pole scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for PoleGrid {
    fn default() -> Self {
        PoleGrid { r_min: 1e-4, r_max: 50.0, points: 2048 }
    }
}

impl PoleGrid {
    pub fn radii(&self) -> Vec<f64> {
        let (a, b) = (self.r_min.ln(), self.r_max.ln());
        let n = self.points.max(2);
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if !fm.is_finite() {
            break;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Evaluable channel functions of one split system.
#[derive(Debug, Clone)]
pub struct ChannelFunctions {
    pub split: Arc<SplitSystem>,
}

impl ChannelFunctions {
    pub fn new(split: Arc<SplitSystem>) -> Self {
        ChannelFunctions { split }
    }

    /// Symmetric `W` with `W1, W2` on the diagonal and `Y` off it.
    pub fn w(&self, r: f64, energy: f64) -> Result<DMatrix<f64>, ReductionError> {
        Ok(self.split.channel_jet(r, energy, 0)?.w.remove(0))
    }

    pub fn z(&self, r: f64, energy: f64) -> Result<f64, ReductionError> {
        Ok(self.split.channel_jet(r, energy, 0)?.z)
    }

    /// Sign changes of `det V22` and of the eliminated diagonal, located by bisection.
    pub fn pole_report(&self, energy: f64, grid: &PoleGrid) -> Vec<SingularPoint> {
        let split = &self.split;
        let radii = grid.radii();
        let samples: Vec<(f64, Option<Vec<f64>>)> = radii
            .par_iter()
            .map(|&r| (split.det_v22(r, energy), split.reduced_diag(r, energy).ok()))
            .collect();
        let mut out = Vec::new();
        let mut det_roots = Vec::new();
        for w in 0..radii.len() - 1 {
            let (d0, d1) = (samples[w].0, samples[w + 1].0);
            if d0.is_finite() && d1.is_finite() && d0 != 0.0 && (d0 > 0.0) != (d1 > 0.0) {
                let r = bisect(|x| split.det_v22(x, energy), radii[w], radii[w + 1]);
                det_roots.push((radii[w], radii[w + 1]));
                out.push(SingularPoint { r, energy, kind: SingularKind::AlgebraicBlock });
            }
        }
        let c = split.channel_count();
        for i in 0..c {
            for w in 0..radii.len() - 1 {
                let (Some(a), Some(b)) = (&samples[w].1, &samples[w + 1].1) else { continue };
                if (a[i] > 0.0) == (b[i] > 0.0) {
                    continue;
                }
                if det_roots.iter().any(|&(lo, hi)| lo == radii[w] && hi == radii[w + 1]) {
                    continue;
                }
                let f = |x: f64| split.reduced_diag(x, energy).map(|d| d[i]).unwrap_or(f64::NAN);
                let r = bisect(f, radii[w], radii[w + 1]);
                // a sign change through a pole of the entry is not a zero
                let scale = a[i].abs().max(b[i].abs());
                let at = f(r).abs();
                if at.is_finite() && at <= 1e-6 * scale.max(1.0) {
                    out.push(SingularPoint { r, energy, kind: SingularKind::EliminatedEntry(i) });
                }
            }
        }
        out.sort_by(|x, y| x.r.total_cmp(&y.r));
        out
    }
}
