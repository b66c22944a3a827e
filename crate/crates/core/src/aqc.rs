//! Adiabatic interpolation Hamiltonian for a 3-SAT instance.
//!
//! Basis state `z` (bit `i` = value of variable `i`) carries the problem
//! energy `H_p[z]`, the number of clauses violated by `z`. The driver is
//! `H_b = sum_i d_i (1 - σx_i) / 2` with `d_i` the number of clauses that
//! mention variable `i`, and the interpolation is
//! `H(s) = (1 - s) H_b + s H_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sat::CnfFormula;

/// Default qubit bound for dense construction (dimension 16384).
pub const DEFAULT_MAX_QUBITS: u32 = 14;

/// Dense real symmetric matrix in full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseSymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseSymmetricMatrix {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    /// Build from the lower triangle: `f(i, j)` is called for `j <= i` and
    /// mirrored.
    pub fn from_lower(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * m.dim + i] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Set both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.dim + j] = value;
        self.entries[j * self.dim + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        DenseSymmetricMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

/// The pair `(H_b, H_p)` for one formula.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AqcSystem {
    pub n: u32,
    pub dim: usize,
    /// Violated-clause count per basis state.
    pub hp_diag: Vec<u32>,
    /// Clause occurrences per variable.
    pub hb_weights: Vec<u32>,
    pub source: CnfFormula,
}

pub fn build_system(formula: &CnfFormula) -> Result<AqcSystem> {
    build_system_with_limit(formula, DEFAULT_MAX_QUBITS)
}

pub fn build_system_with_limit(formula: &CnfFormula, max_qubits: u32) -> Result<AqcSystem> {
    let n = formula.num_vars();
    if n > max_qubits {
        return Err(Error::ResourceBound(format!(
            "{n} qubits exceed the dense bound of {max_qubits}"
        )));
    }
    let dim = 1usize << n;
    let masks = formula.violation_masks();
    let hp_diag = (0..dim as u64)
        .map(|z| masks.iter().filter(|&&(mask, bad)| z & mask == bad).count() as u32)
        .collect();
    Ok(AqcSystem {
        n,
        dim,
        hp_diag,
        hb_weights: formula.occurrences(),
        source: formula.clone(),
    })
}

impl AqcSystem {
    pub fn num_clauses(&self) -> usize {
        self.source.num_clauses()
    }

    fn hb_diagonal(&self) -> f64 {
        self.hb_weights.iter().map(|&d| f64::from(d)).sum::<f64>() / 2.0
    }

    /// Dense `H(s) = (1 - s) H_b + s H_p`.
    pub fn hamiltonian_at(&self, s: f64) -> Result<DenseSymmetricMatrix> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!("s = {s} outside [0, 1]")));
        }
        let mut h = DenseSymmetricMatrix::zeros(self.dim);
        let base = (1.0 - s) * self.hb_diagonal();
        for (z, &v) in self.hp_diag.iter().enumerate() {
            h.entries[z * self.dim + z] = base + s * f64::from(v);
            for (i, &d) in self.hb_weights.iter().enumerate() {
                let partner = z ^ (1 << i);
                if partner < z && d > 0 {
                    h.set(z, partner, -(1.0 - s) * f64::from(d) / 2.0);
                }
            }
        }
        Ok(h)
    }

    pub fn hb_matrix(&self) -> DenseSymmetricMatrix {
        self.hamiltonian_at(0.0).expect("s = 0 is in range")
    }

    pub fn hp_matrix(&self) -> DenseSymmetricMatrix {
        self.hamiltonian_at(1.0).expect("s = 1 is in range")
    }

    /// `H_b v` without materializing `H_b`.
    pub fn apply_hb(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let diag = self.hb_diagonal();
        (0..self.dim)
            .map(|z| {
                let flips: f64 = self
                    .hb_weights
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| f64::from(d) * v[z ^ (1 << i)])
                    .sum();
                diag * v[z] - flips / 2.0
            })
            .collect()
    }

    /// Whether `H_b` annihilates `v` to within `1e-10 * dim`.
    pub fn hb_annihilates(&self, v: &[f64]) -> bool {
        let residual = self.apply_hb(v).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        residual <= 1e-10 * self.dim as f64
    }

    /// Exact analytic trace of `H(s)`.
    pub fn trace_at(&self, s: f64) -> f64 {
        let m = self.num_clauses() as f64;
        let half_dim = self.dim as f64 / 2.0;
        (1.0 - s) * half_dim * 3.0 * m + s * m * self.dim as f64 / 8.0
    }
}

/// The uniform superposition is the zero-energy ground state of `H_b`.
pub fn hb_ground_state_check(system: &AqcSystem) -> bool {
    let amp = (system.dim as f64).sqrt().recip();
    system.hb_annihilates(&vec![amp; system.dim])
}
