//! Spectra of `H(s)` along the interpolation grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aqc::AqcSystem;
use crate::eigen::eigenvalues_symmetric;
use crate::error::{Error, Result};

/// Ascending eigenvalues of `H(s)` at one interpolation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub s: f64,
    pub eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Spectra at every grid point for one instance.
///
/// Serializes as `{n, m, f, seed, s_grid, spectra}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SweepJson", try_from = "SweepJson")]
pub struct SweepResult {
    pub n: u32,
    pub m: usize,
    pub f: f64,
    pub seed: Option<u64>,
    pub spectra: Vec<Spectrum>,
}

#[derive(Serialize, Deserialize)]
struct SweepJson {
    n: u32,
    m: usize,
    f: f64,
    seed: Option<u64>,
    s_grid: Vec<f64>,
    spectra: Vec<Vec<f64>>,
}

impl From<SweepResult> for SweepJson {
    fn from(r: SweepResult) -> Self {
        let (s_grid, spectra) = r.spectra.into_iter().map(|sp| (sp.s, sp.eigenvalues)).unzip();
        SweepJson {
            n: r.n,
            m: r.m,
            f: r.f,
            seed: r.seed,
            s_grid,
            spectra,
        }
    }
}

impl TryFrom<SweepJson> for SweepResult {
    type Error = String;

    fn try_from(j: SweepJson) -> std::result::Result<Self, String> {
        if j.s_grid.len() != j.spectra.len() {
            return Err(format!(
                "s_grid has {} points but {} spectra",
                j.s_grid.len(),
                j.spectra.len()
            ));
        }
        Ok(SweepResult {
            n: j.n,
            m: j.m,
            f: j.f,
            seed: j.seed,
            spectra: j
                .s_grid
                .into_iter()
                .zip(j.spectra)
                .map(|(s, eigenvalues)| Spectrum { s, eigenvalues })
                .collect(),
        })
    }
}

impl SweepResult {
    pub fn s_grid(&self) -> Vec<f64> {
        self.spectra.iter().map(|sp| sp.s).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Evenly spaced grid on `[0, 1]` with both endpoints.
pub fn interpolation_grid(num_points: usize) -> Result<Vec<f64>> {
    if num_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 interpolation points, got {num_points}"
        )));
    }
    let last = (num_points - 1) as f64;
    Ok((0..num_points).map(|k| k as f64 / last).collect())
}

pub fn spectrum_at(system: &AqcSystem, s: f64) -> Result<Spectrum> {
    Ok(Spectrum {
        s,
        eigenvalues: eigenvalues_symmetric(&system.hamiltonian_at(s)?)?,
    })
}

/// Full spectrum at `num_points` evenly spaced values of `s`.
pub fn sweep(system: &AqcSystem, num_points: usize, seed: Option<u64>) -> Result<SweepResult> {
    let grid = interpolation_grid(num_points)?;
    let spectra = grid
        .par_iter()
        .map(|&s| spectrum_at(system, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        n: system.n,
        m: system.num_clauses(),
        f: system.source.ratio(),
        seed,
        spectra,
    })
}
