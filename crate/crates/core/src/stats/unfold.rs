use serde::{Deserialize, Serialize};

use super::UnfoldedSpectrum;
use crate::error::{Error, Result};

/// Fewest levels accepted for unfolding.
pub const MIN_LEVELS: usize = 20;
/// Raw spacings below this fraction of the spectral span count as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;
/// Value substituted for degenerate unfolded spacings.
pub const CLAMPED_SPACING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldParams {
    pub poly_degree: usize,
    pub edge_trim_fraction: f64,
}

impl Default for UnfoldParams {
    fn default() -> Self {
        UnfoldParams {
            poly_degree: 6,
            edge_trim_fraction: 0.05,
        }
    }
}

/// Least-squares polynomial coefficients (monomial basis in `x`) via
/// Householder QR of the Vandermonde matrix.
fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Vec<f64> {
    let rows = x.len();
    let cols = degree + 1;
    // column-major Vandermonde
    let mut a: Vec<f64> = (0..cols)
        .flat_map(|p| x.iter().map(move |&xi| xi.powi(p as i32)))
        .collect();
    let mut b = y.to_vec();
    for k in 0..cols {
        let col = &mut a[k * rows..(k + 1) * rows];
        let norm = col[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[k] > 0.0 { -norm } else { norm };
        col[k] -= alpha;
        let vnorm2: f64 = col[k..].iter().map(|v| v * v).sum();
        let v: Vec<f64> = col[k..].to_vec();
        col[k] = alpha;
        col[k + 1..].iter_mut().for_each(|c| *c = 0.0);
        let reflect = |target: &mut [f64]| {
            let dot: f64 = v.iter().zip(&target[k..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            target[k..].iter_mut().zip(&v).for_each(|(t, vi)| *t -= f * vi);
        };
        for j in k + 1..cols {
            reflect(&mut a[j * rows..(j + 1) * rows]);
        }
        reflect(&mut b);
    }
    let mut coef = vec![0.0; cols];
    for k in (0..cols).rev() {
        let r_kk = a[k * rows + k];
        let s: f64 = (k + 1..cols).map(|j| a[j * rows + k] * coef[j]).sum();
        coef[k] = if r_kk.abs() > 0.0 { (b[k] - s) / r_kk } else { 0.0 };
    }
    coef
}

fn polyval(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Map a spectrum to unit mean level spacing.
///
/// The cumulative staircase `N(E) = #{λ_i <= E}` is smoothed by a
/// least-squares polynomial (in the energy rescaled to `[-1, 1]`) and each
/// level is mapped through it. The outer `edge_trim_fraction` of levels on
/// both sides is discarded. Retained levels are reported as `N̄(λ_i)`; their
/// spacings are divided by the mean so it is exactly one. Spacings that are degenerate in the raw
/// spectrum, or that the smoothed staircase would make non-positive, are
/// clamped to [`CLAMPED_SPACING`].
pub fn unfold(eigenvalues: &[f64], params: &UnfoldParams) -> Result<UnfoldedSpectrum> {
    let n = eigenvalues.len();
    if n < MIN_LEVELS {
        return Err(Error::InsufficientData(format!(
            "unfolding needs at least {MIN_LEVELS} levels, got {n}"
        )));
    }
    if !(0.0..0.5).contains(&params.edge_trim_fraction) {
        return Err(Error::InvalidParameter(format!(
            "edge trim fraction {} outside [0, 0.5)",
            params.edge_trim_fraction
        )));
    }
    let (lo, hi) = (eigenvalues[0], eigenvalues[n - 1]);
    let span = hi - lo;
    if span <= 0.0 || !span.is_finite() {
        return Err(Error::DegenerateSpectrum(format!(
            "all {n} levels equal {lo}"
        )));
    }

    let x: Vec<f64> = eigenvalues.iter().map(|&e| 2.0 * (e - lo) / span - 1.0).collect();
    // staircase with ties counted at their upper index
    let mut staircase = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && eigenvalues[j + 1] == eigenvalues[i] {
            j += 1;
        }
        staircase[i..=j].iter_mut().for_each(|v| *v = (j + 1) as f64);
        i = j + 1;
    }
    let coef = polyfit(&x, &staircase, params.poly_degree.min(n - 1));
    let smooth: Vec<f64> = x.iter().map(|&xi| polyval(&coef, xi)).collect();

    let trim = (params.edge_trim_fraction * n as f64).floor() as usize;
    let kept = trim..n - trim;
    if kept.len() < 2 {
        return Err(Error::InsufficientData("trimming left fewer than two levels".into()));
    }
    let mean = (smooth[kept.end - 1] - smooth[kept.start]) / (kept.len() - 1) as f64;
    if mean.is_nan() || mean <= 0.0 {
        return Err(Error::DegenerateSpectrum(
            "smoothed staircase is not increasing over the retained levels".into(),
        ));
    }
    let levels = smooth[kept.clone()].to_vec();

    let tolerance = DEGENERACY_TOLERANCE * span;
    let mut degenerate = 0usize;
    let mut non_monotone = 0usize;
    let spacings: Vec<f64> = levels
        .windows(2)
        .zip(eigenvalues[kept].windows(2))
        .map(|(u, raw)| {
            if raw[1] - raw[0] < tolerance {
                degenerate += 1;
                CLAMPED_SPACING
            } else {
                let d = (u[1] - u[0]) / mean;
                if d < CLAMPED_SPACING {
                    non_monotone += 1;
                    CLAMPED_SPACING
                } else {
                    d
                }
            }
        })
        .collect();

    Ok(UnfoldedSpectrum {
        degenerate_fraction: degenerate as f64 / spacings.len() as f64,
        levels,
        edge_discard: trim,
        non_monotone,
        spacings,
    })
}
