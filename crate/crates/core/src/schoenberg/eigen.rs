//! Smallest eigenvalue of a symmetric matrix: dense solver for small
//! matrices, restarted Lanczos above a size threshold.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenConfig {
    /// Matrices with at least this many rows go to Lanczos.
    pub dense_threshold: usize,
    /// Krylov subspace dimension per Lanczos cycle.
    pub subspace: usize,
    pub max_restarts: usize,
    /// Residual tolerance relative to the largest Ritz value.
    pub tolerance: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            dense_threshold: 500,
            subspace: 40,
            max_restarts: 500,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    Lanczos,
    /// Lanczos did not converge and the dense solver was used instead.
    DenseFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinEigen {
    pub value: f64,
    pub method: EigenMethod,
}

pub fn min_eigenvalue(f: &DMatrix<f64>, config: &EigenConfig) -> MinEigen {
    assert!(f.is_square(), "matrix must be square");
    if f.nrows() < config.dense_threshold {
        return MinEigen {
            value: dense_min(f),
            method: EigenMethod::Dense,
        };
    }
    match lanczos_smallest(f, config) {
        Some(value) => MinEigen {
            value,
            method: EigenMethod::Lanczos,
        },
        None => MinEigen {
            value: dense_min(f),
            method: EigenMethod::DenseFallback,
        },
    }
}

fn dense_min(f: &DMatrix<f64>) -> f64 {
    if f.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(f.clone()).eigenvalues.min()
}

/// Explicitly restarted Lanczos with full reorthogonalization, restarting
/// from the current smallest Ritz vector.
pub fn lanczos_smallest(a: &DMatrix<f64>, config: &EigenConfig) -> Option<f64> {
    let n = a.nrows();
    let p = config.subspace.clamp(2, n.max(2)).min(n);
    let mut rng = stream_rng(0, n, 0);
    let mut start = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    start.normalize_mut();

    for _ in 0..config.max_restarts.max(1) {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(p + 1);
        let mut alphas = Vec::with_capacity(p);
        let mut betas: Vec<f64> = Vec::with_capacity(p);
        basis.push(start.clone());
        let mut invariant = false;
        for j in 0..p {
            let mut w = a * &basis[j];
            let alpha = basis[j].dot(&w);
            alphas.push(alpha);
            w.axpy(-alpha, &basis[j], 1.0);
            if j > 0 {
                w.axpy(-betas[j - 1], &basis[j - 1], 1.0);
            }
            for _ in 0..2 {
                for v in &basis {
                    let c = v.dot(&w);
                    w.axpy(-c, v, 1.0);
                }
            }
            let beta = w.norm();
            betas.push(beta);
            if beta <= f64::EPSILON * alpha.abs().max(1.0) * 1e-2 {
                invariant = true;
                break;
            }
            if j + 1 < p {
                basis.push(w / beta);
            }
        }
        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (idx, theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
        let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        let s = eig.eigenvectors.column(idx);
        let residual = if invariant {
            0.0
        } else {
            (betas[m - 1] * s[m - 1]).abs()
        };
        if residual <= config.tolerance * scale || m == n {
            return Some(theta);
        }
        let mut y = DVector::zeros(n);
        for (v, c) in basis.iter().zip(s.iter()) {
            y.axpy(*c, v, 1.0);
        }
        let norm = y.norm();
        if norm == 0.0 {
            return None;
        }
        start = y / norm;
    }
    None
}
