//! Monte-Carlo positive-definiteness test on `S^d`.
//!
//! A zonal function is positive semi-definite on the sphere exactly when its
//! Gegenbauer coefficients are non-negative, so a negative coefficient can be
//! detected by finding unit vectors whose kernel matrix `f(v_i · v_j)` has a
//! negative eigenvalue. The planted problems here scale selected
//! coefficients by `1 - α/α₀`; bisection on "a negative eigenvalue shows
//! up" then estimates `α₀` for a given tuple size `n`.

mod eigen;
mod harmonics;
mod kernel;
mod sampling;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::search::{bisect_unchecked, BisectionConfig};

pub use eigen::{lanczos_smallest, min_eigenvalue, EigenConfig, EigenMethod, MinEigen};
pub use harmonics::{harmonic_count, harmonic_count_at_degree};
pub use kernel::series_kernel;
pub use sampling::{embed_vectors, gram_matrix, sample_unit_vectors, stream_rng};

#[derive(Debug, Error, PartialEq)]
pub enum SchoenbergError {
    #[error("dim: sphere dimension must be at least 2, got {0}")]
    InvalidDimension(u32),
    #[error("cf: expected nmax + 1 = {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("cf: coefficient {index} must be finite and non-negative, got {value}")]
    NegativeCoefficient { index: usize, value: f64 },
    #[error("hits: index {0} is outside 0..=nmax")]
    HitOutOfRange(usize),
    #[error("a0: planted value must be positive and finite, got {0}")]
    InvalidA0(f64),
    #[error("tol: bisection tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("samples: need at least one sample")]
    NoSamples,
    #[error("n_list: tuple sizes must be at least 1")]
    InvalidTupleSize,
    #[error("tol_eig: must be finite and non-negative, got {0}")]
    InvalidEigenTolerance(f64),
}

/// Planted test function
/// `f_α(z) = Σ_k (cf[k] - (α/a0) cf[k] [k ∈ hits]) C_k^λ(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchoenbergProblem {
    d: u32,
    cf: Vec<f64>,
    hits: BTreeSet<usize>,
    a0: f64,
    tol: f64,
}

impl SchoenbergProblem {
    pub fn new(
        d: u32,
        cf: Vec<f64>,
        hits: impl IntoIterator<Item = usize>,
        a0: f64,
        tol: f64,
    ) -> Result<Self, SchoenbergError> {
        if d < 2 {
            return Err(SchoenbergError::InvalidDimension(d));
        }
        if cf.is_empty() {
            return Err(SchoenbergError::CoefficientCount { expected: 1, got: 0 });
        }
        if let Some((index, &value)) = cf.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0)) {
            return Err(SchoenbergError::NegativeCoefficient { index, value });
        }
        let hits: BTreeSet<usize> = hits.into_iter().collect();
        if let Some(&h) = hits.iter().find(|&&h| h >= cf.len()) {
            return Err(SchoenbergError::HitOutOfRange(h));
        }
        if !(a0.is_finite() && a0 > 0.0) {
            return Err(SchoenbergError::InvalidA0(a0));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(SchoenbergError::InvalidTolerance(tol));
        }
        Ok(Self { d, cf, hits, a0, tol })
    }

    /// Unit coefficients up to `nmax`, every level from `l_min` on planted.
    pub fn planted(d: u32, l_min: usize, nmax: usize, a0: f64, tol: f64) -> Result<Self, SchoenbergError> {
        Self::new(d, vec![1.0; nmax + 1], l_min..=nmax, a0, tol)
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn ambient_dimension(&self) -> usize {
        self.d as usize + 1
    }

    pub fn nmax(&self) -> usize {
        self.cf.len() - 1
    }

    pub fn cf(&self) -> &[f64] {
        &self.cf
    }

    pub fn hits(&self) -> &BTreeSet<usize> {
        &self.hits
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// First level that turns negative past `a0`.
    pub fn l_min(&self) -> Option<usize> {
        self.hits.iter().next().copied()
    }

    pub fn effective_coefficients(&self, alpha: f64) -> Vec<f64> {
        let scale = alpha / self.a0;
        self.cf
            .iter()
            .enumerate()
            .map(|(k, &c)| if self.hits.contains(&k) { c - scale * c } else { c })
            .collect()
    }
}

/// Kernel matrix of `f_α` on the Gram matrix `z`.
pub fn kernel_matrix(problem: &SchoenbergProblem, alpha: f64, z: &DMatrix<f64>) -> DMatrix<f64> {
    series_kernel(&problem.effective_coefficients(alpha), problem.d, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    /// Eigenvalues below `-tol_eig` count as negative.
    pub tol_eig: f64,
    pub eigen: EigenConfig,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            tol_eig: 0.0,
            eigen: EigenConfig::default(),
        }
    }
}

/// Whether the kernel matrix of `f_α` on `vectors` is positive
/// semi-definite (up to `tol_eig`).
pub fn psd_test(problem: &SchoenbergProblem, alpha: f64, vectors: &DMatrix<f64>, options: &TestOptions) -> bool {
    let z = gram_matrix(vectors);
    psd_on_gram(problem, alpha, &z, options)
}

fn psd_on_gram(problem: &SchoenbergProblem, alpha: f64, z: &DMatrix<f64>, options: &TestOptions) -> bool {
    let f = kernel_matrix(problem, alpha, z);
    min_eigenvalue(&f, &options.eigen).value >= -options.tol_eig
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean_alpha: f64,
    /// Sample standard deviation (zero for a single sample).
    pub std_alpha: f64,
    pub samples: usize,
}

impl SampleStats {
    pub fn from_estimates(n: usize, estimates: &[f64]) -> Self {
        let samples = estimates.len();
        let mean = estimates.iter().sum::<f64>() / samples as f64;
        let var = if samples > 1 {
            estimates.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (samples - 1) as f64
        } else {
            0.0
        };
        Self {
            n,
            mean_alpha: mean,
            std_alpha: var.sqrt(),
            samples,
        }
    }

    pub fn standard_error(&self) -> f64 {
        self.std_alpha / (self.samples as f64).sqrt()
    }
}

/// Per-sample estimates of `α₀` for tuple size `n`.
///
/// Each sample draws its own `n` vectors from stream `(n, index)` of `seed`,
/// then bisects `α` on `[0, 1]`, moving the upper end down whenever a
/// negative eigenvalue is found. The estimate is the last midpoint tried.
pub fn alpha0_estimates(
    problem: &SchoenbergProblem,
    n: usize,
    samples: usize,
    seed: u64,
    options: &TestOptions,
) -> Vec<f64> {
    let config = BisectionConfig::with_epsilon(problem.tol);
    (0..samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(seed, n, index);
            let vectors = sample_unit_vectors(n, problem.ambient_dimension(), &mut rng);
            let z = gram_matrix(&vectors);
            let out = bisect_unchecked(&config, |a| !psd_on_gram(problem, a, &z, options));
            out.steps.last().map_or(out.alpha, |s| s.0)
        })
        .collect()
}

pub fn estimate_alpha0(
    problem: &SchoenbergProblem,
    n: usize,
    samples: usize,
    seed: u64,
    options: &TestOptions,
) -> Result<SampleStats, SchoenbergError> {
    if samples == 0 {
        return Err(SchoenbergError::NoSamples);
    }
    if n == 0 {
        return Err(SchoenbergError::InvalidTupleSize);
    }
    Ok(SampleStats::from_estimates(
        n,
        &alpha0_estimates(problem, n, samples, seed, options),
    ))
}

/// Tuple sizes from 1 up to `2 H(l_min, d)`: every size up to 8 (or up to
/// the cap when it is at most 24), then roughly geometric steps of 1.25.
pub fn n_schedule(l_min: u64, d: u64) -> Vec<usize> {
    let cap = (2 * harmonic_count(l_min, d)) as usize;
    if cap <= 24 {
        return (1..=cap).collect();
    }
    let mut out: Vec<usize> = (1..=8).collect();
    let mut n = 8usize;
    while n < cap {
        n = (n + 1).max((n as f64 * 1.25).round() as usize).min(cap);
        out.push(n);
    }
    out
}

fn default_samples() -> usize {
    20
}

fn default_tol() -> f64 {
    1e-6
}

/// Run description for the Monte-Carlo test.
/// `hits` are 0-based degree indices into `cf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchoenbergConfig {
    pub dim: u32,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Tuple sizes; empty means the default schedule for `min(hits)`.
    #[serde(default)]
    pub n_list: Vec<usize>,
    pub a0: f64,
    pub nmax: usize,
    pub hits: Vec<usize>,
    pub cf: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tol_eig: f64,
    #[serde(default)]
    pub eigen: EigenConfig,
}

impl SchoenbergConfig {
    pub fn problem(&self) -> Result<SchoenbergProblem, SchoenbergError> {
        if self.cf.len() != self.nmax + 1 {
            return Err(SchoenbergError::CoefficientCount {
                expected: self.nmax + 1,
                got: self.cf.len(),
            });
        }
        SchoenbergProblem::new(self.dim, self.cf.clone(), self.hits.iter().copied(), self.a0, self.tol)
    }

    /// Copy with every default materialized (the tuple schedule included).
    pub fn resolved(&self) -> Result<Self, SchoenbergError> {
        let problem = self.problem()?;
        if self.samples == 0 {
            return Err(SchoenbergError::NoSamples);
        }
        if !(self.tol_eig.is_finite() && self.tol_eig >= 0.0) {
            return Err(SchoenbergError::InvalidEigenTolerance(self.tol_eig));
        }
        if self.n_list.contains(&0) {
            return Err(SchoenbergError::InvalidTupleSize);
        }
        let mut out = self.clone();
        if out.n_list.is_empty() {
            let l_min = problem.l_min().unwrap_or(0) as u64;
            out.n_list = n_schedule(l_min, self.dim as u64);
        }
        Ok(out)
    }

    pub fn options(&self) -> TestOptions {
        TestOptions {
            tol_eig: self.tol_eig,
            eigen: self.eigen,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchoenbergReport {
    pub config: SchoenbergConfig,
    pub rows: Vec<SampleStats>,
}

/// Runs every tuple size of a config.
pub fn run(config: &SchoenbergConfig) -> Result<SchoenbergReport, SchoenbergError> {
    let config = config.resolved()?;
    let problem = config.problem()?;
    let options = config.options();
    let rows = config
        .n_list
        .iter()
        .map(|&n| estimate_alpha0(&problem, n, config.samples, config.seed, &options))
        .collect::<Result<_, _>>()?;
    Ok(SchoenbergReport { config, rows })
}
