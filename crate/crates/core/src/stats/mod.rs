//! Spectral unfolding, nearest-neighbour spacings and Brody fits.

mod brody;
mod unfold;

use serde::{Deserialize, Serialize};

pub use brody::{
    brody_beta, brody_cdf, brody_log_likelihood, brody_pdf, brody_sample, fit_brody, histogram,
    ks_statistic, FitParams, HistogramBin, DEFAULT_MIN_SAMPLE, Q_SEARCH_MAX,
};
pub use unfold::{unfold, UnfoldParams};

use crate::error::Result;
use crate::spectrum::SweepResult;

/// Fits flagged when more than this fraction of raw spacings are exact
/// degeneracies.
pub const DEGENERATE_DOMINATED: f64 = 0.5;

/// Unfolded levels (edge-trimmed) with unit mean spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedSpectrum {
    pub levels: Vec<f64>,
    /// Fraction of retained raw spacings below the degeneracy tolerance.
    pub degenerate_fraction: f64,
    /// Levels trimmed from each end.
    pub edge_discard: usize,
    /// Retained spacings where the smoothed staircase decreased.
    pub non_monotone: usize,
    spacings: Vec<f64>,
}

impl UnfoldedSpectrum {
    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn spacing_sample(&self, s: Option<f64>) -> SpacingSample {
        SpacingSample {
            spacings: self.spacings.clone(),
            s,
            instance: None,
            degenerate_fraction: self.degenerate_fraction,
        }
    }
}

/// Nearest-neighbour spacings, unit mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample {
    pub spacings: Vec<f64>,
    pub s: Option<f64>,
    pub instance: Option<u64>,
    pub degenerate_fraction: f64,
}

impl SpacingSample {
    pub fn new(spacings: Vec<f64>) -> Self {
        SpacingSample {
            spacings,
            s: None,
            instance: None,
            degenerate_fraction: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.spacings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spacings.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.spacings.len() as f64
    }

    /// Concatenate samples; the degenerate fraction is weighted by length.
    pub fn pooled<'a>(samples: impl IntoIterator<Item = &'a SpacingSample>) -> SpacingSample {
        let mut spacings = Vec::new();
        let mut degenerate = 0.0;
        for s in samples {
            degenerate += s.degenerate_fraction * s.len() as f64;
            spacings.extend_from_slice(&s.spacings);
        }
        let n = spacings.len().max(1) as f64;
        SpacingSample {
            spacings,
            s: None,
            instance: None,
            degenerate_fraction: degenerate / n,
        }
    }
}

/// Result of fitting the Brody distribution to one spacing sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrodyFit {
    pub s: Option<f64>,
    pub q: f64,
    pub beta: f64,
    pub log_likelihood: f64,
    pub sample_size: usize,
    pub valid: bool,
    pub degenerate_fraction: f64,
}

impl BrodyFit {
    /// Placeholder for a grid point whose spectrum cannot be unfolded
    /// (too few levels or zero span): `q = 0`, never valid.
    pub fn unfittable(s: Option<f64>, sample_size: usize) -> Self {
        BrodyFit {
            s,
            q: 0.0,
            beta: 1.0,
            log_likelihood: 0.0,
            sample_size,
            valid: false,
            degenerate_fraction: 1.0,
        }
    }
}

/// Per-instance maximum of the Brody parameter over the interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBrody {
    pub q_max: f64,
    pub s_at_max: f64,
    /// False when no grid point produced a fit eligible for the maximum.
    pub has_valid_fit: bool,
    pub fits: Vec<BrodyFit>,
}

/// Unfold and fit one spectrum.
pub fn fit_spectrum(
    eigenvalues: &[f64],
    s: Option<f64>,
    unfold_params: &UnfoldParams,
    fit_params: &FitParams,
) -> Result<BrodyFit> {
    let unfolded = unfold(eigenvalues, unfold_params)?;
    fit_brody(&unfolded.spacing_sample(s), fit_params)
}

/// Unfold and fit at every grid point and take the largest `q`.
///
/// Spectra that cannot be unfolded yield [`BrodyFit::unfittable`].
/// Only fits with `valid == true` compete unless
/// `fit_params.include_invalid` is set. With no eligible fit the maximum
/// is reported as `q = 0` at the first grid point with
/// `has_valid_fit == false`. Ties go to the earliest grid point.
pub fn max_brody(
    sweep: &SweepResult,
    unfold_params: &UnfoldParams,
    fit_params: &FitParams,
) -> Result<MaxBrody> {
    if sweep.spectra.is_empty() {
        return Err(crate::Error::InsufficientData("sweep has no grid points".into()));
    }
    let fits = sweep
        .spectra
        .iter()
        .map(|sp| match fit_spectrum(&sp.eigenvalues, Some(sp.s), unfold_params, fit_params) {
            Err(crate::Error::InsufficientData(_) | crate::Error::DegenerateSpectrum(_)) => {
                Ok(BrodyFit::unfittable(Some(sp.s), sp.eigenvalues.len().saturating_sub(1)))
            }
            other => other,
        })
        .collect::<Result<Vec<_>>>()?;
    let best = fits
        .iter()
        .filter(|f| f.valid || fit_params.include_invalid)
        .fold(None::<&BrodyFit>, |best, f| match best {
            Some(b) if b.q >= f.q => Some(b),
            _ => Some(f),
        });
    Ok(match best {
        Some(b) => MaxBrody {
            q_max: b.q,
            s_at_max: b.s.unwrap_or(0.0),
            has_valid_fit: true,
            fits,
        },
        None => MaxBrody {
            q_max: 0.0,
            s_at_max: sweep.spectra[0].s,
            has_valid_fit: false,
            fits,
        },
    })
}
