//! Quark-model potentials on top of the two-body reduction: per-sector
//! channel sources, family labels, spectra, and Regge constants.

mod constants;
mod table;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::Matrix2;
use thiserror::Error;

use crate::angular_algebra::{
    build_radial_system, HarmonicLabel, RadialProfile, Sector, SpinStructure, StructureKind,
};
use crate::coupled_solver::{
    channel_branch, classify_coupling, solve, Branch, ChannelSource, ChannelView, CoupledError, CouplingClass, SolverOptions,
};
use crate::quasipotential_core::{energy_from_b, fit_asymptotics, AsymptoticScaling, LambdaIndex, QuasiError};
use crate::reduction_chain::{split_system, ReductionError, SplitSystem};

pub use constants::{
    check_properties, coulomb_shift, extract_constants, fit_regge, vector_confinement_run, ConstantOptions,
    CoulombShift, FamilyFit, Property, PropertyReport, TrajectoryFit, VectorConfinement,
};
pub use table::{compute_trajectories, spectroscopic_label, SpectrumRow, SpectrumTable};

/// Orbit ladder for the channel exponents; the `j ± 1` orbital shifts make
/// the shorter default ladder too coarse for the rational snap.
pub const MESON_FIT_LADDER: [u32; 5] = [256, 512, 1024, 2048, 4096];

/// Index at which families are labeled from the large-large content.
pub const PROBE_J: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MesonError {
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error("{structure}, {sector} sector, j={j}: {source}")]
    Reduction { structure: String, sector: &'static str, j: u32, source: ReductionError },
    #[error("{structure}, {sector} sector: {source}")]
    Solver { structure: String, sector: &'static str, source: CoupledError },
    #[error("{0}")]
    Quasi(#[from] QuasiError),
    #[error("fit quality: {0}")]
    Fit(String),
}

/// Radial factor of a structure.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `a r`
    Linear,
    /// `−α/r`
    Coulomb,
    /// `a r − α/r`
    Funnel,
    Custom(RadialProfile),
}

impl Profile {
    pub fn resolve(&self, a: f64, alpha: f64) -> RadialProfile {
        match self {
            Profile::Linear => RadialProfile::linear(a),
            Profile::Coulomb => RadialProfile::coulomb(alpha),
            Profile::Funnel => RadialProfile::linear(a).add(&RadialProfile::coulomb(alpha)),
            Profile::Custom(p) => p.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Linear => "linear",
            Profile::Coulomb => "coulomb",
            Profile::Funnel => "funnel",
            Profile::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MesonSpec {
    pub vector: Option<(StructureKind, Profile)>,
    pub scalar: Option<(StructureKind, Profile)>,
    pub alpha: f64,
    pub a: f64,
    pub m1: f64,
    pub m2: f64,
}

impl Default for MesonSpec {
    fn default() -> Self {
        MesonSpec { vector: None, scalar: None, alpha: 0.27, a: 0.27, m1: 0.0, m2: 0.0 }
    }
}

impl MesonSpec {
    /// Linear scalar confinement `a r` with the given structure.
    pub fn scalar(kind: StructureKind, a: f64) -> Self {
        MesonSpec { scalar: Some((kind, Profile::Linear)), a, ..Default::default() }
    }

    /// Linear vector confinement `a r` with the given structure.
    pub fn vector_confining(kind: StructureKind, a: f64) -> Self {
        MesonSpec { vector: Some((kind, Profile::Linear)), a, ..Default::default() }
    }

    /// Adds a Coulomb vector part `−α/r`.
    pub fn with_coulomb(mut self, kind: StructureKind, alpha: f64) -> Self {
        self.vector = Some((kind, Profile::Coulomb));
        self.alpha = alpha;
        self
    }

    pub fn with_masses(mut self, m1: f64, m2: f64) -> Self {
        self.m1 = m1;
        self.m2 = m2;
        self
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn validate(&self) -> Result<(), MesonError> {
        let bad = |m: String| Err(MesonError::InvalidSpec(m));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(self.m1 >= 0.0 && self.m2 >= 0.0 && self.m1.is_finite() && self.m2.is_finite()) {
            return bad(format!("masses must be non-negative, got {}, {}", self.m1, self.m2));
        }
        if self.vector.is_none() && self.scalar.is_none() {
            return bad("no interaction structure given".into());
        }
        if let Some((k, _)) = &self.vector {
            if k.is_scalar() {
                return bad(format!("{} is not a vector structure", k.name()));
            }
        }
        if let Some((k, _)) = &self.scalar {
            if k.is_vector() {
                return bad(format!("{} is not a scalar structure", k.name()));
            }
        }
        Ok(())
    }

    pub fn structures(&self) -> Vec<SpinStructure> {
        [&self.scalar, &self.vector]
            .into_iter()
            .flatten()
            .map(|(k, p)| SpinStructure::new(*k, p.resolve(self.a, self.alpha)))
            .collect()
    }

    /// E.g. `scalar-minimal(linear)+vector-static(coulomb)`.
    pub fn name(&self) -> String {
        [&self.scalar, &self.vector]
            .into_iter()
            .flatten()
            .map(|(k, p)| format!("{}({})", k.name(), p.name()))
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Level family of the two-body spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Spin singlet, `ℓ = j`.
    A,
    /// Spin triplet, `ℓ = j`.
    Zero,
    /// Spin triplet, `ℓ = j + 1`.
    Minus,
    /// Spin triplet, `ℓ = j − 1`.
    Plus,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::A, Family::Zero, Family::Minus, Family::Plus];

    pub fn symbol(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::Zero => "0",
            Family::Minus => "-",
            Family::Plus => "+",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Family::ALL.into_iter().find(|f| f.symbol() == s)
    }

    pub fn from_label(l: HarmonicLabel) -> Self {
        match l {
            HarmonicLabel::Singlet => Family::A,
            HarmonicLabel::TripletEqual => Family::Zero,
            HarmonicLabel::TripletAbove => Family::Minus,
            HarmonicLabel::TripletBelow => Family::Plus,
        }
    }

    pub fn spin(self) -> u32 {
        if self == Family::A {
            0
        } else {
            1
        }
    }

    /// Orbital momentum at total `j`; `None` for `+` at `j = 0`.
    pub fn orbital(self, j: u32) -> Option<u32> {
        match self {
            Family::A | Family::Zero => Some(j),
            Family::Minus => Some(j + 1),
            Family::Plus => j.checked_sub(1),
        }
    }

    pub fn sector(self) -> Sector {
        match self {
            Family::A | Family::Zero => Sector::EqualOrbital,
            Family::Minus | Family::Plus => Sector::ShiftedOrbital,
        }
    }
}

/// Channel source of one parity sector, with the split system cached per `j`.
pub struct MesonChannels {
    structures: Vec<SpinStructure>,
    name: String,
    pub sector: Sector,
    pub m1: f64,
    pub m2: f64,
    a: f64,
    cache: Mutex<BTreeMap<u32, Arc<SplitSystem>>>,
}

impl MesonChannels {
    pub fn new(spec: &MesonSpec, sector: Sector) -> Self {
        MesonChannels {
            structures: spec.structures(),
            name: spec.name(),
            sector,
            m1: spec.m1,
            m2: spec.m2,
            a: spec.a,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    fn reduction_err(&self, j: u32) -> impl Fn(ReductionError) -> MesonError + '_ {
        move |source| MesonError::Reduction {
            structure: self.name.clone(),
            sector: self.sector.name(),
            j,
            source,
        }
    }

    pub fn split(&self, j: u32) -> Result<Arc<SplitSystem>, MesonError> {
        if let Some(s) = self.cache.lock().expect("split cache").get(&j) {
            return Ok(s.clone());
        }
        let sys = build_radial_system(&self.structures, self.m1, self.m2, j, self.sector)
            .map_err(|e| self.reduction_err(j)(e.into()))?;
        let split = Arc::new(split_system(sys).map_err(self.reduction_err(j))?);
        self.cache.lock().expect("split cache").entry(j).or_insert(split.clone());
        Ok(split)
    }
}

impl ChannelSource for MesonChannels {
    fn matrix_jet(&self, r: f64, b: f64, index: u32) -> Result<[Matrix2<f64>; 3], QuasiError> {
        let energy = energy_from_b(b, self.m1, self.m2)?;
        let split = self.split(index).map_err(|e| match e {
            MesonError::Reduction { source, .. } => QuasiError::Reduction(source),
            other => QuasiError::Domain(other.to_string()),
        })?;
        if split.channel_count() != 2 {
            return Err(QuasiError::Domain(format!("j={index} has a single channel")));
        }
        let cj = split.channel_jet(r, energy, 2)?;
        let m = |k: usize| Matrix2::new(cj.w[k][(0, 0)], cj.w[k][(0, 1)], cj.w[k][(1, 0)], cj.w[k][(1, 1)]);
        Ok([m(0), m(1), m(2)])
    }

    fn scale_hint(&self, index: u32) -> Option<(f64, f64)> {
        let j = f64::from(index);
        Some(((j / self.a).sqrt(), self.a * j))
    }
}

/// Zero-order solution of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSolution {
    pub sector: Sector,
    /// `None` when classification itself failed and the fallback ran.
    pub class: Option<CouplingClass>,
    pub branches: [Branch; 2],
    pub families: [Family; 2],
    /// Large-large content of each branch in the two harmonic families.
    pub content: [[f64; 2]; 2],
    /// True if the content did not separate the branches and energy order decided.
    pub tie_broken_by_energy: bool,
    /// Set when the coupled solve failed and each channel was solved on its own.
    pub fallback: Option<String>,
}

impl SectorSolution {
    pub fn branch(&self, family: Family) -> Option<&Branch> {
        self.families.iter().position(|f| *f == family).map(|i| &self.branches[i])
    }
}

pub struct MesonModel {
    pub spec: MesonSpec,
    pub options: SolverOptions,
    channels: [MesonChannels; 2],
    solutions: [OnceLock<Result<SectorSolution, MesonError>>; 2],
}

/// Builds both parity sectors; the sector solutions are computed on first use.
pub fn make_meson_model(spec: MesonSpec) -> Result<MesonModel, MesonError> {
    spec.validate()?;
    let mut options = SolverOptions::default();
    options.fit.index = LambdaIndex::Total;
    options.fit.ladder = MESON_FIT_LADDER.to_vec();
    let channels = [MesonChannels::new(&spec, Sector::EqualOrbital), MesonChannels::new(&spec, Sector::ShiftedOrbital)];
    Ok(MesonModel { spec, options, channels, solutions: [OnceLock::new(), OnceLock::new()] })
}

impl MesonModel {
    pub fn channels(&self, sector: Sector) -> &MesonChannels {
        &self.channels[sector_index(sector)]
    }

    pub fn sector_solution(&self, sector: Sector) -> Result<&SectorSolution, MesonError> {
        let i = sector_index(sector);
        self.solutions[i]
            .get_or_init(|| solve_sector(&self.spec, &self.channels[i], &self.options))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Solves both sectors in parallel.
    pub fn solve_all(&self) -> Result<(), MesonError> {
        let (a, b) =
            rayon::join(|| self.sector_solution(Sector::EqualOrbital).map(|_| ()), || {
                self.sector_solution(Sector::ShiftedOrbital).map(|_| ())
            });
        a.and(b)
    }

    pub fn branch(&self, family: Family) -> Result<Branch, MesonError> {
        let sol = self.sector_solution(family.sector())?;
        Ok(*sol.branch(family).expect("every sector labels both families"))
    }

    /// Zero-order `E` of a level; `j` must be positive.
    pub fn energy(&self, family: Family, j: u32, n_r: u32) -> Result<f64, MesonError> {
        if j == 0 {
            return Err(MesonError::Quasi(QuasiError::Domain("the expansion needs j > 0".into())));
        }
        let br = self.branch(family)?;
        let lv = br.levels(j, n_r)[n_r as usize];
        Ok(energy_from_b(lv.b, self.spec.m1, self.spec.m2)?)
    }
}

fn sector_index(s: Sector) -> usize {
    match s {
        Sector::EqualOrbital => 0,
        Sector::ShiftedOrbital => 1,
    }
}

fn solve_sector(spec: &MesonSpec, ch: &MesonChannels, opts: &SolverOptions) -> Result<SectorSolution, MesonError> {
    let wrap = |source: CoupledError| MesonError::Solver { structure: spec.name(), sector: ch.sector.name(), source };
    let (class, branches, fallback) = match classify_coupling(ch, opts) {
        Ok(class) => match solve(ch, &class, opts) {
            Ok(b) => (Some(class), b, None),
            Err(e @ CoupledError::NotDegenerate { .. }) => {
                let b = independent_branches(ch, Some(class.scalings), opts).map_err(wrap)?;
                (Some(class), b, Some(e.to_string()))
            }
            Err(e) => return Err(wrap(e)),
        },
        Err(e @ CoupledError::Ambiguous { .. }) => {
            let b = independent_branches(ch, None, opts).map_err(wrap)?;
            (None, b, Some(e.to_string()))
        }
        Err(e) => return Err(wrap(e)),
    };

    let split = ch.split(PROBE_J)?;
    let weights = split.large_large_weights();
    let labels = split.large_large_labels();
    let content: [[f64; 2]; 2] = [0, 1].map(|b| {
        let v = branches[b].mixing;
        [0, 1].map(|f| v[0] * v[0] * weights[0][f] + v[1] * v[1] * weights[1][f])
    });
    let lean = |b: usize| content[b][0] - content[b][1];
    let tie = (lean(0) - lean(1)).abs() < 1e-6;
    let first_gets_label0 = if !tie {
        lean(0) > lean(1)
    } else {
        let e = |b: usize| branches[b].levels(PROBE_J, 0)[0].b;
        let label0 = Family::from_label(labels[0]);
        // energy order: ℓ = j + 1 lies above ℓ = j − 1; the singlet is taken as the lower pair member
        let label0_is_upper = matches!(label0, Family::Minus | Family::Zero);
        (e(0) >= e(1)) == label0_is_upper
    };
    let (f0, f1) = (Family::from_label(labels[0]), Family::from_label(labels[1]));
    let families = if first_gets_label0 { [f0, f1] } else { [f1, f0] };
    Ok(SectorSolution { sector: ch.sector, class, branches, families, content, tie_broken_by_energy: tie, fallback })
}

fn independent_branches(
    ch: &MesonChannels,
    scalings: Option<[AsymptoticScaling; 2]>,
    opts: &SolverOptions,
) -> Result<[Branch; 2], CoupledError> {
    let one = |c: usize| {
        let s = match scalings {
            Some(s) => s[c],
            None => fit_asymptotics(&ChannelView { source: ch, channel: c }, &opts.fit)
                .map_err(|source| CoupledError::Channel { channel: c, source })?,
        };
        channel_branch(ch, &s, c, opts).map(|(b, _)| b)
    };
    let (b0, b1) = rayon::join(|| one(0), || one(1));
    Ok([b0?, b1?])
}
