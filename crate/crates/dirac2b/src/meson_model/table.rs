use rayon::prelude::*;

use super::{Family, MesonModel};

const ORBITAL_LETTERS: &[u8] = b"SPDFGHIKLMNOQRTUVWXYZ";

/// `n^{2s+1}L_j` with `n = n_r + ℓ + 1`; orbital letters past `Z` print as `[ℓ]`.
pub fn spectroscopic_label(n_r: u32, spin: u32, ell: u32, j: u32) -> String {
    let letter = match ORBITAL_LETTERS.get(ell as usize) {
        Some(c) => (*c as char).to_string(),
        None => format!("[{ell}]"),
    };
    format!("{}^{}{}_{}", n_r + ell + 1, 2 * spin + 1, letter, j)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub j: u32,
    pub n_r: u32,
    pub family: Family,
    pub ell: Option<u32>,
    pub energy: Option<f64>,
    pub label: String,
    /// `ok`, or the reason the level is missing.
    pub status: String,
}

impl SpectrumRow {
    pub fn energy2(&self) -> Option<f64> {
        self.energy.map(|e| e * e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub structure: String,
    pub a: f64,
    pub m1: f64,
    pub m2: f64,
    /// Sorted by (family, n_r, j).
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn get(&self, family: Family, n_r: u32, j: u32) -> Option<&SpectrumRow> {
        self.rows.iter().find(|r| r.family == family && r.n_r == n_r && r.j == j)
    }
}

/// Zero-order levels for every family, `n_r ∈ 0..=n_r_max` and `j` in `js`.
///
/// Failures become rows with `energy = None` and the reason in `status`.
pub fn compute_trajectories(model: &MesonModel, js: &[u32], n_r_max: u32) -> SpectrumTable {
    let _ = model.solve_all();
    let mut keys = Vec::new();
    for family in Family::ALL {
        for n_r in 0..=n_r_max {
            for &j in js {
                keys.push((family, n_r, j));
            }
        }
    }
    let rows = keys
        .par_iter()
        .map(|&(family, n_r, j)| {
            let ell = family.orbital(j);
            let label = ell.map_or_else(|| "-".to_string(), |l| spectroscopic_label(n_r, family.spin(), l, j));
            let (energy, status) = match ell {
                None => (None, format!("no {} state at j={j}", family.symbol())),
                Some(_) => match model.energy(family, j, n_r) {
                    Ok(e) => (Some(e), "ok".to_string()),
                    Err(e) => (None, e.to_string()),
                },
            };
            SpectrumRow { j, n_r, family, ell, energy, label, status }
        })
        .collect();
    SpectrumTable { structure: model.spec.name(), a: model.spec.a, m1: model.spec.m1, m2: model.spec.m2, rows }
}
