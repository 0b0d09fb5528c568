//! Bispinor harmonics at fixed total angular momentum `j`, `m_j = j`.
//!
//! States live in the product basis `|l, m_l> (x) |1/2, m1> (x) |1/2, m2>`
//! restricted to `m_l + m1 + m2 = j` and `l` in `{j-1, j, j+1}`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::clebsch::clebsch_gordan;
use super::AngularError;

/// Product-basis label. Spin projections are doubled (`+1` is up).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisKey {
    pub l: u32,
    pub ml: i64,
    pub two_m1: i32,
    pub two_m2: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularBasis {
    pub j: u32,
    pub states: Vec<BasisKey>,
}

impl AngularBasis {
    pub fn new(j: u32) -> Self {
        let mut states = Vec::new();
        let ji = i64::from(j);
        for l in [ji - 1, ji, ji + 1] {
            if l < 0 {
                continue;
            }
            for two_m1 in [1, -1] {
                for two_m2 in [1, -1] {
                    let ml = ji - i64::from(two_m1 + two_m2) / 2;
                    if ml.abs() <= l {
                        states.push(BasisKey { l: l as u32, ml, two_m1, two_m2 });
                    }
                }
            }
        }
        AngularBasis { j, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index(&self, key: &BasisKey) -> Option<usize> {
        self.states.iter().position(|s| s == key)
    }
}

/// Spin-angular type of a harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HarmonicLabel {
    /// s = 0, l = j
    Singlet,
    /// s = 1, l = j
    TripletEqual,
    /// s = 1, l = j + 1
    TripletAbove,
    /// s = 1, l = j - 1
    TripletBelow,
}

impl HarmonicLabel {
    pub const ALL: [HarmonicLabel; 4] = [
        HarmonicLabel::Singlet,
        HarmonicLabel::TripletEqual,
        HarmonicLabel::TripletAbove,
        HarmonicLabel::TripletBelow,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            HarmonicLabel::Singlet => "A",
            HarmonicLabel::TripletEqual => "0",
            HarmonicLabel::TripletAbove => "-",
            HarmonicLabel::TripletBelow => "+",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        HarmonicLabel::ALL.into_iter().find(|l| l.symbol() == s)
    }

    pub fn spin(self) -> u32 {
        match self {
            HarmonicLabel::Singlet => 0,
            _ => 1,
        }
    }

    /// Orbital momentum, or `None` when it would be negative.
    pub fn orbital(self, j: u32) -> Option<u32> {
        match self {
            HarmonicLabel::Singlet | HarmonicLabel::TripletEqual => Some(j),
            HarmonicLabel::TripletAbove => Some(j + 1),
            HarmonicLabel::TripletBelow => j.checked_sub(1),
        }
    }

    /// Whether the harmonic exists at this `j` (no triplet with l = j at j = 0).
    pub fn exists(self, j: u32) -> bool {
        match self {
            HarmonicLabel::TripletEqual | HarmonicLabel::TripletBelow => j > 0,
            _ => true,
        }
    }
}

/// Position of a section inside the 4x4 block form of the spinor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiracBlock {
    LargeLarge,
    LargeSmall,
    SmallLarge,
    SmallSmall,
}

impl DiracBlock {
    /// (particle-1 index, particle-2 index), 0 = large, 1 = small.
    pub fn indices(self) -> (usize, usize) {
        match self {
            DiracBlock::LargeLarge => (0, 0),
            DiracBlock::LargeSmall => (0, 1),
            DiracBlock::SmallLarge => (1, 0),
            DiracBlock::SmallSmall => (1, 1),
        }
    }
}

/// The two parity sectors at fixed `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sector {
    /// Diagonal blocks carry the l = j harmonics (A, 0); parity (-1)^(j+1).
    EqualOrbital,
    /// Diagonal blocks carry the l = j -+ 1 harmonics; parity (-1)^j.
    ShiftedOrbital,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::EqualOrbital, Sector::ShiftedOrbital];

    pub fn parity(self, j: u32) -> i32 {
        let even_j = j % 2 == 0;
        match (self, even_j) {
            (Sector::EqualOrbital, true) | (Sector::ShiftedOrbital, false) => -1,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sector::EqualOrbital => "equal",
            Sector::ShiftedOrbital => "shifted",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "equal" => Some(Sector::EqualOrbital),
            "shifted" => Some(Sector::ShiftedOrbital),
            _ => None,
        }
    }

    /// Harmonic pairs for (diagonal blocks, off-diagonal blocks).
    pub fn label_pairs(self) -> ([HarmonicLabel; 2], [HarmonicLabel; 2]) {
        let same = [HarmonicLabel::Singlet, HarmonicLabel::TripletEqual];
        let shifted = [HarmonicLabel::TripletAbove, HarmonicLabel::TripletBelow];
        match self {
            Sector::EqualOrbital => (same, shifted),
            Sector::ShiftedOrbital => (shifted, same),
        }
    }
}

/// One angular section of the radial ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularState {
    pub j: u32,
    pub sector: Sector,
    pub label: HarmonicLabel,
    pub block: DiracBlock,
    /// The radial amplitude carries a factor `i` (diagonal blocks).
    pub imaginary: bool,
    pub coefficients: BTreeMap<BasisKey, f64>,
}

impl AngularState {
    pub fn norm_squared(&self) -> f64 {
        self.coefficients.values().map(|c| c * c).sum()
    }

    pub fn total_spin(&self) -> u32 {
        self.label.spin()
    }

    pub fn orbital(&self) -> u32 {
        self.label.orbital(self.j).expect("existing harmonic")
    }

    pub fn dense(&self, basis: &AngularBasis) -> DVector<f64> {
        let mut v = DVector::zeros(basis.len());
        for (k, c) in &self.coefficients {
            if let Some(i) = basis.index(k) {
                v[i] = *c;
            }
        }
        v
    }
}

/// Coefficients of the coupled spin state |s, ms> over (2m1, 2m2).
fn spin_state(s: u32, two_ms: i32) -> Vec<((i32, i32), f64)> {
    let mut out = Vec::new();
    for two_m1 in [1, -1] {
        for two_m2 in [1, -1] {
            let c = clebsch_gordan(1, two_m1, 1, two_m2, 2 * s as i32, two_ms).unwrap_or(0.0);
            if c != 0.0 {
                out.push(((two_m1, two_m2), c));
            }
        }
    }
    out
}

/// Harmonic with orbital `l` and spin `s` coupled (l x s) to `|j, j>`.
pub fn harmonic_coefficients(j: u32, label: HarmonicLabel) -> Result<BTreeMap<BasisKey, f64>, AngularError> {
    if !label.exists(j) {
        return Err(AngularError::InvalidArgument(format!(
            "harmonic {} does not exist at j={j}",
            label.symbol()
        )));
    }
    let l = label.orbital(j).expect("checked above");
    let s = label.spin();
    let ji = i64::from(j);
    let mut out = BTreeMap::new();
    for ms in -(s as i64)..=(s as i64) {
        let ml = ji - ms;
        if ml.abs() > i64::from(l) {
            continue;
        }
        let c = clebsch_gordan(2 * l as i32, 2 * ml as i32, 2 * s as i32, 2 * ms as i32, 2 * j as i32, 2 * j as i32)?;
        if c == 0.0 {
            continue;
        }
        for ((two_m1, two_m2), cs) in spin_state(s, 2 * ms as i32) {
            *out.entry(BasisKey { l, ml, two_m1, two_m2 }).or_insert(0.0) += c * cs;
        }
    }
    Ok(out)
}

/// The 8 sections (4 at j = 0) in the order s1, s2, t1, t2, u1, u2, v1, v2.
pub fn build_harmonics(j: u32, sector: Sector) -> Result<Vec<AngularState>, AngularError> {
    let (diag, off) = sector.label_pairs();
    let layout = [
        (DiracBlock::LargeLarge, diag, true),
        (DiracBlock::LargeSmall, off, false),
        (DiracBlock::SmallLarge, off, false),
        (DiracBlock::SmallSmall, diag, true),
    ];
    let mut out = Vec::with_capacity(8);
    for (block, labels, imaginary) in layout {
        for label in labels {
            if !label.exists(j) {
                continue;
            }
            out.push(AngularState {
                j,
                sector,
                label,
                block,
                imaginary,
                coefficients: harmonic_coefficients(j, label)?,
            });
        }
    }
    Ok(out)
}

/// Dense harmonic vectors as rows, in `HarmonicLabel::ALL` order (absent labels skipped).
pub fn harmonic_rows(j: u32, basis: &AngularBasis) -> Result<(Vec<HarmonicLabel>, DMatrix<f64>), AngularError> {
    let labels: Vec<HarmonicLabel> = HarmonicLabel::ALL.into_iter().filter(|l| l.exists(j)).collect();
    let mut rows = DMatrix::zeros(labels.len(), basis.len());
    for (i, label) in labels.iter().enumerate() {
        for (k, c) in harmonic_coefficients(j, *label)? {
            let col = basis.index(&k).ok_or_else(|| {
                AngularError::InvalidArgument(format!("basis state {k:?} missing at j={j}"))
            })?;
            rows[(i, col)] = c;
        }
    }
    Ok((labels, rows))
}
