//! The Brody nearest-neighbour spacing distribution
//!
//! `p_q(δ) = (1 + q) β δ^q exp(-β δ^(1+q))`, `β = Γ((2 + q)/(1 + q))^(1+q)`,
//!
//! which is Poisson at `q = 0` and the Wigner surmise at `q = 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::{BrodyFit, SpacingSample, DEGENERATE_DOMINATED};
use crate::error::{Error, Result};
use crate::seed;

/// Upper end of the maximum-likelihood search interval.
pub const Q_SEARCH_MAX: f64 = 1.5;
pub const DEFAULT_MIN_SAMPLE: usize = 50;
const GOLDEN_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    /// Fits on fewer spacings are reported with `valid = false`.
    pub min_sample: usize,
    /// Upper bound of the `q` search interval.
    pub q_upper: f64,
    /// Let invalid fits compete for the per-sweep maximum.
    pub include_invalid: bool,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            min_sample: DEFAULT_MIN_SAMPLE,
            q_upper: Q_SEARCH_MAX,
            include_invalid: false,
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if q >= 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Brody parameter q = {q} must be >= 0")))
    }
}

/// `β(q) = Γ((2 + q) / (1 + q))^(1 + q)`.
pub fn brody_beta(q: f64) -> f64 {
    gamma((2.0 + q) / (1.0 + q)).powf(1.0 + q)
}

pub fn brody_pdf(q: f64, delta: f64) -> Result<f64> {
    check_q(q)?;
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("spacing {delta} must be >= 0")));
    }
    let beta = brody_beta(q);
    Ok((1.0 + q) * beta * delta.powf(q) * (-beta * delta.powf(1.0 + q)).exp())
}

pub fn brody_cdf(q: f64, delta: f64) -> Result<f64> {
    check_q(q)?;
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("spacing {delta} must be >= 0")));
    }
    Ok(-(-brody_beta(q) * delta.powf(1.0 + q)).exp_m1())
}

/// Draw `count` i.i.d. spacings by inverting the CDF:
/// `δ = (-ln(1 - u) / β)^(1 / (1 + q))`.
pub fn brody_sample(q: f64, count: usize, seed_value: u64) -> Result<SpacingSample> {
    check_q(q)?;
    if q > Q_SEARCH_MAX {
        return Err(Error::InvalidParameter(format!("q = {q} above {Q_SEARCH_MAX}")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let beta = brody_beta(q);
    let exponent = (1.0 + q).recip();
    let mut rng = seed::rng(seed_value);
    let spacings = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            (-(-u).ln_1p() / beta).powf(exponent)
        })
        .collect();
    Ok(SpacingSample::new(spacings))
}

/// Sufficient statistics for the log-likelihood.
struct Likelihood<'a> {
    spacings: &'a [f64],
    sum_ln: f64,
}

impl<'a> Likelihood<'a> {
    fn new(spacings: &'a [f64]) -> Self {
        Likelihood {
            spacings,
            sum_ln: spacings.iter().map(|d| d.ln()).sum(),
        }
    }

    fn at(&self, q: f64) -> f64 {
        let n = self.spacings.len() as f64;
        let beta = brody_beta(q);
        let power: f64 = self.spacings.iter().map(|d| d.powf(1.0 + q)).sum();
        n * ((1.0 + q).ln() + beta.ln()) + q * self.sum_ln - beta * power
    }
}

pub fn brody_log_likelihood(sample: &SpacingSample, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(Likelihood::new(&sample.spacings).at(q))
}

/// Golden-section maximisation of `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

/// Maximum-likelihood Brody parameter on `[0, q_upper]`.
///
/// The golden-section optimum is compared against the interval ends and
/// the Poisson/Wigner points so the reported likelihood is never below
/// any of them.
pub fn fit_brody(sample: &SpacingSample, params: &FitParams) -> Result<BrodyFit> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty spacing sample".into()));
    }
    if let Some(bad) = sample.spacings.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::InvalidInput(format!("spacing {bad} is not a finite non-negative value")));
    }
    let upper = params.q_upper;
    check_q(upper)?;
    let floored: Vec<f64>;
    let spacings = if sample.spacings.contains(&0.0) {
        floored = sample.spacings.iter().map(|d| d.max(super::unfold::CLAMPED_SPACING)).collect();
        &floored[..]
    } else {
        &sample.spacings[..]
    };
    let likelihood = Likelihood::new(spacings);
    let golden = golden_max(|q| likelihood.at(q), 0.0, upper, GOLDEN_TOLERANCE);
    let (q, log_likelihood) = [golden, 0.0, 1.0_f64.min(upper), upper]
        .into_iter()
        .map(|q| (q, likelihood.at(q)))
        .fold((f64::NAN, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best });
    let sample_size = sample.len();
    Ok(BrodyFit {
        s: sample.s,
        q,
        beta: brody_beta(q),
        log_likelihood,
        sample_size,
        valid: sample_size >= params.min_sample && sample.degenerate_fraction <= DEGENERATE_DOMINATED,
        degenerate_fraction: sample.degenerate_fraction,
    })
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let c = cdf(x);
        d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
    /// Fitted Brody density at the bin centre.
    pub brody_density_at_fit: f64,
}

/// Equal-width histogram of spacings on `[0, max]` with the fitted density.
pub fn histogram(sample: &SpacingSample, fit: &BrodyFit, bins: usize, max: f64) -> Result<Vec<HistogramBin>> {
    if bins == 0 || max.is_nan() || max <= 0.0 {
        return Err(Error::InvalidParameter("histogram needs bins >= 1 and max > 0".into()));
    }
    let width = max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &d in &sample.spacings {
        if d < max {
            counts[((d / width) as usize).min(bins - 1)] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let left = i as f64 * width;
            Ok(HistogramBin {
                bin_left: left,
                bin_right: left + width,
                count,
                brody_density_at_fit: brody_pdf(fit.q, left + 0.5 * width)?,
            })
        })
        .collect()
}
