//! Eigenvalues of dense real symmetric matrices.
//!
//! Householder reduction to tridiagonal form followed by the implicitly
//! shifted QL iteration. Only eigenvalues are produced.

use crate::aqc::DenseSymmetricMatrix;
use crate::error::{Error, Result};

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 60;

/// Symmetric tridiagonal matrix: `diag[i]` and `offdiag[i]` coupling `i` and
/// `i + 1` (`offdiag` has length `n - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

/// Orthogonal similarity reduction to tridiagonal form.
pub fn tridiagonalize(matrix: &DenseSymmetricMatrix) -> Tridiagonal {
    let n = matrix.dim();
    let mut a = matrix.as_slice().to_vec();
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let alpha = a[(k + 1) * n + k];
        let sigma: f64 = (k + 2..n).map(|i| a[i * n + k] * a[i * n + k]).sum();
        if sigma == 0.0 {
            offdiag[k] = alpha;
            continue;
        }
        let norm = (alpha * alpha + sigma).sqrt();
        let beta = if alpha <= 0.0 { norm } else { -norm };
        let tau = (beta - alpha) / beta;
        let scale = (alpha - beta).recip();
        offdiag[k] = beta;

        // reflector v with v[k + 1] = 1, acting on rows/cols k+1..n
        let lo = k + 1;
        v[lo] = 1.0;
        for i in lo + 1..n {
            v[i] = a[i * n + k] * scale;
        }

        // p = tau * A22 v, stored in w; only the lower triangle is referenced
        w[lo..n].fill(0.0);
        for i in lo..n {
            let row = &a[i * n + lo..i * n + i];
            let vi = v[i];
            let mut acc = a[i * n + i] * vi;
            for (j, &x) in row.iter().enumerate() {
                acc += x * v[lo + j];
                w[lo + j] += x * vi;
            }
            w[i] += acc;
        }
        w[lo..n].iter_mut().for_each(|x| *x *= tau);
        let half_k = 0.5 * tau * (lo..n).map(|i| w[i] * v[i]).sum::<f64>();
        for i in lo..n {
            w[i] -= half_k * v[i];
        }
        for i in lo..n {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[i * n + lo..i * n + i + 1];
            for (j, x) in row.iter_mut().enumerate() {
                *x -= vi * w[lo + j] + wi * v[lo + j];
            }
        }
    }
    if n >= 2 {
        offdiag[n - 2] = a[(n - 1) * n + n - 2];
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    Tridiagonal { diag, offdiag }
}

/// Eigenvalues of a symmetric tridiagonal matrix, ascending.
pub fn tridiagonal_eigenvalues(t: &Tridiagonal) -> Result<Vec<f64>> {
    let n = t.diag.len();
    let mut d = t.diag.clone();
    let mut e = t.offdiag.clone();
    e.push(0.0);

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence { index: l });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// All eigenvalues of `matrix`, ascending.
pub fn eigenvalues_symmetric(matrix: &DenseSymmetricMatrix) -> Result<Vec<f64>> {
    if matrix.dim() == 0 {
        return Err(Error::InvalidInput("matrix has dimension 0".into()));
    }
    if let Some(pos) = matrix.as_slice().iter().position(|x| !x.is_finite()) {
        let n = matrix.dim();
        return Err(Error::InvalidInput(format!(
            "non-finite entry at ({}, {})",
            pos / n,
            pos % n
        )));
    }
    tridiagonal_eigenvalues(&tridiagonalize(matrix))
}
