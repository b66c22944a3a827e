//! Gaussian random-matrix ensembles and one-parameter Gaussian processes.
//!
//! Both are defined by their first two moments,
//!
//! ```text
//! <H_ij(x)> = 0
//! <H_ij(x) H_kl(x')> = ω² / (2β) · f(x - x') · g_ij,kl
//! g(β=1) = δ_ik δ_jl + δ_il δ_jk,   g(β=2) = 2 δ_il δ_jk
//! ```
//!
//! with `f(0) = 1`. A single matrix (GOE for β = 1, GUE for β = 2) is the
//! `x = x'` case. Processes are realised as `H(x) = cos(x) H₁ + sin(x) H₂`
//! with independent `H₁, H₂`, which gives `f(x - x') = cos(x - x')`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aqc::DenseSymmetricMatrix;
use crate::eigen::eigenvalues_symmetric;
use crate::error::{Error, Result};
use crate::seed;
use crate::spectrum::SweepResult;
use crate::stats::{fit_brody, unfold, BrodyFit, FitParams, SpacingSample, UnfoldParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaClass {
    /// Real symmetric, time-reversal invariant.
    Goe,
    /// Complex Hermitian.
    Gue,
}

impl BetaClass {
    pub fn beta(self) -> f64 {
        match self {
            BetaClass::Goe => 1.0,
            BetaClass::Gue => 2.0,
        }
    }

    pub fn from_beta(beta: u8) -> Result<Self> {
        match beta {
            1 => Ok(BetaClass::Goe),
            2 => Ok(BetaClass::Gue),
            other => Err(Error::InvalidParameter(format!("beta must be 1 or 2, got {other}"))),
        }
    }

    /// The tensor `g_ij,kl` of the second moment.
    pub fn contraction(self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        match self {
            BetaClass::Goe => d(i, k) * d(j, l) + d(i, l) * d(j, k),
            BetaClass::Gue => 2.0 * d(i, l) * d(j, k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmtEnsembleConfig {
    pub beta_class: BetaClass,
    pub dim: usize,
    pub omega: f64,
    pub samples: usize,
    pub seed: u64,
}

impl RmtEnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter(format!("ensemble dim {} < 2", self.dim)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one sample".into()));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega {} must be positive", self.omega)));
        }
        Ok(())
    }
}

/// Complex Hermitian matrix, real and imaginary parts in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            dim,
            re: vec![0.0; dim * dim],
            im: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(re, im)` of entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        let k = i * self.dim + j;
        (self.re[k], self.im[k])
    }

    /// Set `(i, j)` and its conjugate `(j, i)`. Diagonal entries must be real.
    pub fn set(&mut self, i: usize, j: usize, re: f64, im: f64) {
        debug_assert!(i != j || im == 0.0);
        let n = self.dim;
        self.re[i * n + j] = re;
        self.im[i * n + j] = im;
        self.re[j * n + i] = re;
        self.im[j * n + i] = -im;
    }

    /// Eigenvalues via the real symmetric embedding `[[A, -B], [B, A]]`,
    /// whose spectrum is that of `A + iB` with every level doubled.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let embedded = DenseSymmetricMatrix::from_lower(2 * n, |r, c| {
            let (bi, i) = (r / n, r % n);
            let (bj, j) = (c / n, c % n);
            let k = i * n + j;
            match (bi, bj) {
                (0, 0) | (1, 1) => self.re[k],
                (1, 0) => self.im[k],
                _ => -self.im[k],
            }
        });
        Ok(eigenvalues_symmetric(&embedded)?.into_iter().step_by(2).collect())
    }

    fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        HermitianMatrix {
            dim: self.dim,
            re: mix(&self.re, &other.re),
            im: mix(&self.im, &other.im),
        }
    }
}

/// A member of a Gaussian ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleMatrix {
    Real(DenseSymmetricMatrix),
    Complex(HermitianMatrix),
}

impl EnsembleMatrix {
    pub fn dim(&self) -> usize {
        match self {
            EnsembleMatrix::Real(m) => m.dim(),
            EnsembleMatrix::Complex(m) => m.dim(),
        }
    }

    /// Entry `(i, j)` as `(re, im)`.
    pub fn entry(&self, i: usize, j: usize) -> (f64, f64) {
        match self {
            EnsembleMatrix::Real(m) => (m.get(i, j), 0.0),
            EnsembleMatrix::Complex(m) => m.get(i, j),
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        match self {
            EnsembleMatrix::Real(m) => eigenvalues_symmetric(m),
            EnsembleMatrix::Complex(m) => m.eigenvalues(),
        }
    }

    fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        match (self, other) {
            (EnsembleMatrix::Real(p), EnsembleMatrix::Real(q)) => {
                EnsembleMatrix::Real(p.linear_combination(a, q, b))
            }
            (EnsembleMatrix::Complex(p), EnsembleMatrix::Complex(q)) => {
                EnsembleMatrix::Complex(p.combine(a, q, b))
            }
            _ => unreachable!("family members share a symmetry class"),
        }
    }
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("standard deviation is positive and finite")
}

/// GOE draw: off-diagonal variance `ω²/2`, diagonal variance `ω²`.
pub fn sample_goe(dim: usize, omega: f64, seed_value: u64) -> DenseSymmetricMatrix {
    let mut rng = seed::rng(seed_value);
    let off = normal(omega / 2f64.sqrt());
    let diag = normal(omega);
    DenseSymmetricMatrix::from_lower(dim, |i, j| {
        if i == j {
            diag.sample(&mut rng)
        } else {
            off.sample(&mut rng)
        }
    })
}

/// GUE draw: `<|H_ij|²> = ω²/2` for every entry, diagonal real.
pub fn sample_gue(dim: usize, omega: f64, seed_value: u64) -> HermitianMatrix {
    let mut rng = seed::rng(seed_value);
    let diag = normal(omega / 2f64.sqrt());
    let part = normal(omega / 2.0);
    let mut h = HermitianMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..=i {
            if i == j {
                h.set(i, i, diag.sample(&mut rng), 0.0);
            } else {
                let (re, im) = (part.sample(&mut rng), part.sample(&mut rng));
                h.set(i, j, re, im);
            }
        }
    }
    h
}

pub fn sample_ensemble(beta_class: BetaClass, dim: usize, omega: f64, seed_value: u64) -> EnsembleMatrix {
    match beta_class {
        BetaClass::Goe => EnsembleMatrix::Real(sample_goe(dim, omega, seed_value)),
        BetaClass::Gue => EnsembleMatrix::Complex(sample_gue(dim, omega, seed_value)),
    }
}

/// Diagonal matrix with i.i.d. uniform `[0, 1)` entries: uncorrelated levels.
pub fn sample_poisson_diagonal(dim: usize, seed_value: u64) -> DenseSymmetricMatrix {
    let mut rng = seed::rng(seed_value);
    let diag: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    DenseSymmetricMatrix::from_diagonal(&diag)
}

/// Sorted i.i.d. uniform levels.
pub fn sample_poisson_levels(count: usize, seed_value: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed_value);
    let mut levels: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
    levels.sort_by(f64::total_cmp);
    levels
}

/// Parametric correlation `f(x - x')` of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correlation {
    Cosine,
}

impl Correlation {
    pub fn at(self, dx: f64) -> f64 {
        match self {
            Correlation::Cosine => dx.cos(),
        }
    }
}

/// One realisation of a Gaussian process sampled on a grid.
#[derive(Debug, Clone)]
pub struct GpFamily {
    pub beta_class: BetaClass,
    pub correlation: Correlation,
    pub x_grid: Vec<f64>,
    pub matrices: Vec<EnsembleMatrix>,
    h1: EnsembleMatrix,
    h2: EnsembleMatrix,
}

fn check_grid(x_grid: &[f64]) -> Result<()> {
    if x_grid.is_empty() {
        return Err(Error::InvalidParameter("empty parameter grid".into()));
    }
    if x_grid.iter().any(|x| !x.is_finite()) || x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("parameter grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

impl GpFamily {
    /// `H(x)` at an arbitrary parameter value.
    pub fn matrix_at(&self, x: f64) -> EnsembleMatrix {
        self.h1.combine(x.cos(), &self.h2, x.sin())
    }

    pub fn spectra(&self) -> Result<Vec<Vec<f64>>> {
        self.matrices.par_iter().map(EnsembleMatrix::eigenvalues).collect()
    }

    /// A family constant in `x`: `H(x) = H₀`.
    pub fn constant(h0: EnsembleMatrix, x_grid: Vec<f64>) -> Result<Self> {
        check_grid(&x_grid)?;
        let beta_class = match h0 {
            EnsembleMatrix::Real(_) => BetaClass::Goe,
            EnsembleMatrix::Complex(_) => BetaClass::Gue,
        };
        let zero = h0.combine(0.0, &h0, 0.0);
        Ok(GpFamily {
            beta_class,
            correlation: Correlation::Cosine,
            matrices: vec![h0.clone(); x_grid.len()],
            x_grid,
            h1: h0,
            h2: zero,
        })
    }
}

/// Draw `H₁, H₂` with seeds `split(seed, 0, 0)` and `split(seed, 0, 1)` and
/// evaluate the family on `x_grid`.
pub fn sample_gp_family(config: &RmtEnsembleConfig, x_grid: &[f64]) -> Result<GpFamily> {
    config.validate()?;
    check_grid(x_grid)?;
    let h1 = sample_ensemble(config.beta_class, config.dim, config.omega, seed::split(config.seed, 0, 0));
    let h2 = sample_ensemble(config.beta_class, config.dim, config.omega, seed::split(config.seed, 0, 1));
    let matrices = x_grid.iter().map(|&x| h1.combine(x.cos(), &h2, x.sin())).collect();
    Ok(GpFamily {
        beta_class: config.beta_class,
        correlation: Correlation::Cosine,
        x_grid: x_grid.to_vec(),
        matrices,
        h1,
        h2,
    })
}

/// Root-mean-square level velocity `sqrt(<(∂ε_i/∂x)²>)` of unfolded levels.
///
/// Each spectrum is unfolded independently; velocities are central
/// differences on the (possibly non-uniform) grid, one-sided at the ends,
/// averaged over retained levels and grid points. Multiplying the grid by
/// the returned value yields unit mean-squared velocity.
pub fn velocity_scale(x_grid: &[f64], spectra: &[Vec<f64>], params: &UnfoldParams) -> Result<f64> {
    if x_grid.len() < 2 || spectra.len() != x_grid.len() {
        return Err(Error::InsufficientData(format!(
            "velocity needs at least 2 grid points with one spectrum each (got {} and {})",
            x_grid.len(),
            spectra.len()
        )));
    }
    let unfolded = spectra
        .iter()
        .map(|sp| unfold(sp, params).map(|u| u.levels))
        .collect::<Result<Vec<_>>>()?;
    let levels = unfolded[0].len();
    if unfolded.iter().any(|u| u.len() != levels) {
        return Err(Error::InvalidInput("spectra differ in size along the grid".into()));
    }
    let last = x_grid.len() - 1;
    let mut sum = 0.0;
    for k in 0..=last {
        let (a, b) = match k {
            0 => (0, 1),
            k if k == last => (last - 1, last),
            k => (k - 1, k + 1),
        };
        let dx = x_grid[b] - x_grid[a];
        sum += unfolded[a]
            .iter()
            .zip(&unfolded[b])
            .map(|(p, q)| ((q - p) / dx).powi(2))
            .sum::<f64>();
    }
    Ok((sum / (levels * x_grid.len()) as f64).sqrt())
}

pub fn velocity_rescaling(family: &GpFamily, params: &UnfoldParams) -> Result<f64> {
    velocity_scale(&family.x_grid, &family.spectra()?, params)
}

pub fn sweep_velocity_rescaling(sweep: &SweepResult, params: &UnfoldParams) -> Result<f64> {
    let spectra: Vec<Vec<f64>> = sweep.spectra.iter().map(|s| s.eigenvalues.clone()).collect();
    velocity_scale(&sweep.s_grid(), &spectra, params)
}

fn pooled_fit(
    spectra: Vec<Result<Vec<f64>>>,
    unfold_params: &UnfoldParams,
    fit_params: &FitParams,
) -> Result<BrodyFit> {
    let samples = spectra
        .into_iter()
        .map(|sp| unfold(&sp?, unfold_params).map(|u| u.spacing_sample(None)))
        .collect::<Result<Vec<_>>>()?;
    fit_brody(&SpacingSample::pooled(&samples), fit_params)
}

/// Unfold and pool spacings of `samples` GOE matrices (ω = 1) and fit.
pub fn goe_pipeline_check(
    dim: usize,
    samples: usize,
    seed_value: u64,
    unfold_params: &UnfoldParams,
    fit_params: &FitParams,
) -> Result<BrodyFit> {
    if dim < 64 {
        return Err(Error::InvalidParameter(format!("pipeline check needs dim >= 64, got {dim}")));
    }
    let spectra = (0..samples as u64)
        .into_par_iter()
        .map(|k| eigenvalues_symmetric(&sample_goe(dim, 1.0, seed::split(seed_value, 1, k))))
        .collect();
    pooled_fit(spectra, unfold_params, fit_params)
}

/// Same pipeline on diagonal matrices with i.i.d. uniform entries.
pub fn poisson_pipeline_check(
    dim: usize,
    samples: usize,
    seed_value: u64,
    unfold_params: &UnfoldParams,
    fit_params: &FitParams,
) -> Result<BrodyFit> {
    let spectra = (0..samples as u64)
        .into_par_iter()
        .map(|k| eigenvalues_symmetric(&sample_poisson_diagonal(dim, seed::split(seed_value, 2, k))))
        .collect();
    pooled_fit(spectra, unfold_params, fit_params)
}

/// Empirical second moment `<Re H_ij(x) H_kl(x')^*>`-style check against
/// `ω²/(2β) f(x - x') g_ij,kl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceCheck {
    pub x: f64,
    pub x_prime: f64,
    pub indices: [usize; 4],
    pub expected: f64,
    pub observed: f64,
    pub std_error: f64,
    pub passed: bool,
}

/// Estimate `<H_ij(x) H_kl(x')>` over `families` independent families.
///
/// For complex entries the product is taken without conjugation, so
/// `g(β=2)` applies directly; its real part is compared.
pub fn covariance_checks(
    config: &RmtEnsembleConfig,
    families: usize,
    pairs: &[(f64, f64)],
    indices: &[[usize; 4]],
) -> Result<Vec<CovarianceCheck>> {
    config.validate()?;
    if families < 2 {
        return Err(Error::InsufficientData("covariance needs at least 2 families".into()));
    }
    let mut checks = Vec::new();
    for (p, &(x, xp)) in pairs.iter().enumerate() {
        let grid = if x < xp { vec![x, xp] } else if xp < x { vec![xp, x] } else { vec![x] };
        let position = |v: f64| grid.iter().position(|&g| g == v).expect("value is on the grid");
        let (ix, ixp) = (position(x), position(xp));
        let products: Vec<Vec<f64>> = (0..families as u64)
            .into_par_iter()
            .map(|k| {
                let cfg = RmtEnsembleConfig {
                    seed: seed::split(config.seed, 100 + p as u64, k),
                    ..*config
                };
                let fam = sample_gp_family(&cfg, &grid)?;
                let (hx, hxp) = (&fam.matrices[ix], &fam.matrices[ixp]);
                Ok(indices
                    .iter()
                    .map(|&[i, j, k, l]| {
                        let (a, b) = hx.entry(i, j);
                        let (c, d) = hxp.entry(k, l);
                        a * c - b * d
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let norm = config.omega * config.omega / (2.0 * config.beta_class.beta());
        for (t, &idx) in indices.iter().enumerate() {
            let values: Vec<f64> = products.iter().map(|row| row[t]).collect();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let std_error = (var / n).sqrt();
            let [i, j, k, l] = idx;
            let expected = norm * Correlation::Cosine.at(x - xp) * config.beta_class.contraction(i, j, k, l);
            checks.push(CovarianceCheck {
                x,
                x_prime: xp,
                indices: idx,
                expected,
                observed: mean,
                std_error,
                passed: (mean - expected).abs() <= 3.0 * std_error.max(f64::EPSILON),
            });
        }
    }
    Ok(checks)
}

/// Summary written by the `gp-validate` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub goe_q: f64,
    pub poisson_q: f64,
    pub goe_fit: BrodyFit,
    pub poisson_fit: BrodyFit,
    pub covariance_checks: Vec<CovarianceCheck>,
    /// Velocity scale recomputed on the rescaled grid (should be 1).
    pub rescale_idempotence: f64,
    pub velocity_scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub dim: usize,
    pub samples: usize,
    pub covariance_dim: usize,
    pub covariance_families: usize,
    pub seed: u64,
    pub unfold: UnfoldParams,
    pub fit: FitParams,
}

impl Default for CalibrationParams {
    fn default() -> Self {
        CalibrationParams {
            dim: 256,
            samples: 50,
            covariance_dim: 16,
            covariance_families: 10_000,
            seed: 2024,
            unfold: UnfoldParams::default(),
            fit: FitParams::default(),
        }
    }
}

/// Index tuples exercised by the covariance check: a diagonal entry, an
/// off-diagonal entry, its transpose and an uncorrelated pair.
pub const COVARIANCE_INDICES: [[usize; 4]; 4] = [[0, 0, 0, 0], [0, 1, 0, 1], [0, 1, 1, 0], [0, 1, 2, 3]];

pub fn calibration_report(params: &CalibrationParams) -> Result<CalibrationReport> {
    let goe_fit = goe_pipeline_check(params.dim, params.samples, params.seed, &params.unfold, &params.fit)?;
    let poisson_fit = poisson_pipeline_check(params.dim, params.samples, params.seed, &params.unfold, &params.fit)?;
    let cov_config = RmtEnsembleConfig {
        beta_class: BetaClass::Goe,
        dim: params.covariance_dim,
        omega: 1.0,
        samples: params.covariance_families,
        seed: params.seed,
    };
    let third = std::f64::consts::FRAC_PI_3;
    let covariance_checks = covariance_checks(
        &cov_config,
        params.covariance_families,
        &[(0.0, 0.0), (0.0, third), (0.2, 0.2 + 2.0 * third)],
        &COVARIANCE_INDICES,
    )?;

    let grid: Vec<f64> = (0..41).map(|k| f64::from(k) * 0.005).collect();
    let family = sample_gp_family(
        &RmtEnsembleConfig {
            dim: 64,
            ..cov_config
        },
        &grid,
    )?;
    let spectra = family.spectra()?;
    let scale = velocity_scale(&grid, &spectra, &params.unfold)?;
    let rescaled: Vec<f64> = grid.iter().map(|x| x * scale).collect();
    let again = velocity_scale(&rescaled, &spectra, &params.unfold)?;

    Ok(CalibrationReport {
        goe_q: goe_fit.q,
        poisson_q: poisson_fit.q,
        goe_fit,
        poisson_fit,
        covariance_checks,
        rescale_idempotence: again,
        velocity_scale: scale,
    })
}
