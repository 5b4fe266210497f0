//! The divisor-sum amplitude and its expansion into a hyperspherical basis.
//!
//! With `s = 1 - α + M`, `t = (x-1) s / 2` and `q_k = (M+1)/k - 1`,
//!
//! ```text
//! A(x) = Σ_{k | M+1} c_k (s + t) (z_k)_{q_k} / q_k!,   z_k = (α + t) / k
//! ```
//!
//! where `(z)_q` is the rising factorial. Every factor is linear in `x`:
//! `s + t = (s/2)(x + 1)` and `z_k + j = (s/(2k)) x + (α - s/2)/k + j`, so each
//! term is expanded by repeated application of the Jacobi operator to `e_0`
//! without ever solving for roots.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{max_abs, BasisSpec, CoefficientVector, JacobiOperator};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum AmplitudeError {
    #[error("alpha = {0} lies outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("gamma must be finite, got {0}")]
    InvalidGamma(f64),
    #[error("{k} does not divide M+1 = {m_plus_one}")]
    NotADivisor { k: u64, m_plus_one: u64 },
    #[error("custom coefficient table has no entry for divisor {0}")]
    MissingCoefficient(u64),
    #[error("coefficient for divisor {0} must be finite")]
    NonFiniteCoefficient(u64),
}

/// How the divisor weights `c_k` are produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientStrategy {
    /// `c_k = k^-(1+β) (1 + (ln k)^-γ)`, with the bracket set to 2 at `k = 1`.
    #[default]
    Default,
    /// Explicit table `k → c_k`.
    Custom(BTreeMap<u64, f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpec {
    m: u32,
    alpha: Rational,
    beta: f64,
    gamma: f64,
    strategy: CoefficientStrategy,
}

impl AmplitudeSpec {
    pub fn new(m: u32, alpha: Rational, beta: f64, gamma: f64) -> Result<Self, AmplitudeError> {
        if alpha.cmp0().is_lt() || alpha > 1 {
            return Err(AmplitudeError::AlphaOutOfRange(alpha.to_f64()));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(AmplitudeError::InvalidBeta(beta));
        }
        if !gamma.is_finite() {
            return Err(AmplitudeError::InvalidGamma(gamma));
        }
        Ok(Self {
            m,
            alpha,
            beta,
            gamma,
            strategy: CoefficientStrategy::Default,
        })
    }

    /// `γ = β + 1`.
    pub fn with_default_gamma(m: u32, alpha: Rational, beta: f64) -> Result<Self, AmplitudeError> {
        Self::new(m, alpha, beta, beta + 1.0)
    }

    pub fn with_strategy(mut self, strategy: CoefficientStrategy) -> Result<Self, AmplitudeError> {
        if let CoefficientStrategy::Custom(table) = &strategy {
            for k in divisors(self.m as u64 + 1) {
                match table.get(&k) {
                    None => return Err(AmplitudeError::MissingCoefficient(k)),
                    Some(c) if !c.is_finite() => return Err(AmplitudeError::NonFiniteCoefficient(k)),
                    _ => {}
                }
            }
        }
        self.strategy = strategy;
        Ok(self)
    }

    /// Same spec at a different `α`.
    pub fn at_alpha(&self, alpha: Rational) -> Result<Self, AmplitudeError> {
        let mut out = Self::new(self.m, alpha, self.beta, self.gamma)?;
        out.strategy = self.strategy.clone();
        Ok(out)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn strategy(&self) -> &CoefficientStrategy {
        &self.strategy
    }

    /// `s = 1 - α + M`.
    pub fn s(&self) -> Rational {
        Rational::from(1 + self.m) - &self.alpha
    }

    /// `t(x) = (x - 1) s / 2`.
    pub fn t(&self, x: &Rational) -> Rational {
        (x.clone() - 1u32) * self.s() / 2u32
    }

    pub fn divisors(&self) -> Vec<u64> {
        divisors(self.m as u64 + 1)
    }

    /// `q_k = (M+1)/k - 1`.
    pub fn q(&self, k: u64) -> Result<u64, AmplitudeError> {
        let m1 = self.m as u64 + 1;
        if k == 0 || !m1.is_multiple_of(k) {
            return Err(AmplitudeError::NotADivisor { k, m_plus_one: m1 });
        }
        Ok(m1 / k - 1)
    }

    /// Divisor weight `c_k` at `prec` bits.
    pub fn coefficient(&self, k: u64, prec: u32) -> Result<Float, AmplitudeError> {
        self.q(k)?;
        match &self.strategy {
            CoefficientStrategy::Custom(table) => table
                .get(&k)
                .map(|c| Float::with_val(prec, *c))
                .ok_or(AmplitudeError::MissingCoefficient(k)),
            CoefficientStrategy::Default => {
                let power = Float::with_val(prec, k).pow(Float::with_val(prec, -(1.0 + self.beta)));
                let bracket = if k == 1 {
                    Float::with_val(prec, 2)
                } else {
                    let log = Float::with_val(prec, k).ln();
                    log.pow(Float::with_val(prec, -self.gamma)) + 1u32
                };
                Ok(power * bracket)
            }
        }
    }

    /// `c_k / q_k!` at `prec` bits.
    pub fn term_weight(&self, k: u64, prec: u32) -> Result<Float, AmplitudeError> {
        let q = self.q(k)?;
        let fact = Integer::from(Integer::factorial(q as u32));
        Ok(self.coefficient(k, prec)? / fact)
    }
}

/// Positive divisors of `m` in ascending order.
pub fn divisors(m: u64) -> Vec<u64> {
    assert!(m >= 1, "divisors of zero are undefined");
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m.is_multiple_of(d) {
            low.push(d);
            if d * d != m {
                high.push(m / d);
            }
        }
        d += 1;
    }
    low.extend(high.into_iter().rev());
    low
}

/// `slope · x + intercept`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFactor {
    pub slope: Rational,
    pub intercept: Rational,
}

impl LinearFactor {
    pub fn eval(&self, x: &Rational) -> Rational {
        self.slope.clone() * x + &self.intercept
    }
}

/// One divisor term as a product of linear factors (without its weight).
#[derive(Debug, Clone, PartialEq)]
pub struct TermFactorization {
    pub k: u64,
    pub q: u64,
    /// `s (x + 1) / 2`.
    pub prefactor: LinearFactor,
    /// `(α + t)/k + j` for `j = 0..q`.
    pub pochhammer: Vec<LinearFactor>,
}

impl TermFactorization {
    pub fn degree(&self) -> usize {
        self.pochhammer.len() + 1
    }

    pub fn factors(&self) -> impl Iterator<Item = &LinearFactor> {
        std::iter::once(&self.prefactor).chain(&self.pochhammer)
    }

    /// Product of all factors at `x`.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.factors().fold(Rational::from(1), |acc, f| acc * f.eval(x))
    }
}

pub fn factorize_term(spec: &AmplitudeSpec, k: u64) -> Result<TermFactorization, AmplitudeError> {
    let q = spec.q(k)?;
    let half_s = spec.s() / 2u32;
    let prefactor = LinearFactor {
        slope: half_s.clone(),
        intercept: half_s.clone(),
    };
    let slope = half_s.clone() / k;
    let base = (spec.alpha.clone() - &half_s) / k;
    let pochhammer = (0..q)
        .map(|j| LinearFactor {
            slope: slope.clone(),
            intercept: base.clone() + j,
        })
        .collect();
    Ok(TermFactorization {
        k,
        q,
        prefactor,
        pochhammer,
    })
}

/// Amplitude coefficients plus a cancellation diagnostic.
#[derive(Debug, Clone)]
pub struct Expansion<S> {
    pub coefficients: CoefficientVector<S>,
    /// `log10(max weighted intermediate |coefficient| / max final |coefficient|)`.
    pub cancellation_digits: f64,
    pub precision_warning: Option<PrecisionWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionWarning {
    pub cancellation_digits: f64,
    pub digit_budget: f64,
}

impl std::fmt::Display for PrecisionWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "estimated cancellation of {:.1} digits exceeds the {:.1}-digit budget",
            self.cancellation_digits, self.digit_budget
        )
    }
}

struct TermExpansion<S> {
    coeffs: Vec<S>,
    log10_peak: f64,
}

fn expand_term<S: Scalar>(
    spec: &AmplitudeSpec,
    basis: BasisSpec,
    k: u64,
    ctx: S::Ctx,
) -> Result<TermExpansion<S>, AmplitudeError> {
    let term = factorize_term(spec, k)?;
    let mut op = JacobiOperator::with_capacity(basis, term.degree() + 1, ctx);
    let mut coeffs = vec![S::one(ctx)];
    let mut peak = S::one(ctx);
    for factor in term.factors() {
        let a = S::from_rational(&factor.slope, ctx);
        let b = S::from_rational(&factor.intercept, ctx);
        coeffs = op.apply_linear(&coeffs, &a, &b);
        let m = max_abs(&coeffs);
        if m.cmp_abs(&peak) == std::cmp::Ordering::Greater {
            peak = m.clone();
        }
    }
    let weight = S::from_mpfr(&spec.term_weight(k, S::working_precision(ctx))?, ctx);
    for c in &mut coeffs {
        *c *= &weight;
    }
    Ok(TermExpansion {
        coeffs,
        log10_peak: peak.log10_abs() + weight.log10_abs(),
    })
}

/// Coefficients `a_0..a_{M+1}` of the amplitude in `basis`.
///
/// Terms are expanded in parallel; the weighted sum runs sequentially in
/// ascending divisor order so the result does not depend on scheduling.
pub fn expand_amplitude<S: Scalar>(
    spec: &AmplitudeSpec,
    basis: BasisSpec,
    ctx: S::Ctx,
) -> Result<Expansion<S>, AmplitudeError> {
    let terms: Vec<TermExpansion<S>> = spec
        .divisors()
        .par_iter()
        .map(|&k| expand_term(spec, basis, k, ctx))
        .collect::<Result<_, _>>()?;
    let len = spec.m as usize + 2;
    let mut total = vec![S::zero(ctx); len];
    let mut log10_peak = f64::NEG_INFINITY;
    for term in &terms {
        for (acc, c) in total.iter_mut().zip(&term.coeffs) {
            *acc += c;
        }
        log10_peak = log10_peak.max(term.log10_peak);
    }
    let cancellation_digits = (log10_peak - max_abs(&total).log10_abs()).max(0.0);
    let precision_warning = S::digit_budget(ctx)
        .filter(|budget| cancellation_digits >= *budget)
        .map(|digit_budget| PrecisionWarning {
            cancellation_digits,
            digit_budget,
        });
    Ok(Expansion {
        coefficients: CoefficientVector::new(basis, total).expect("length M+2"),
        cancellation_digits,
        precision_warning,
    })
}

/// Direct evaluation of the amplitude at `x` from its divisor-sum form.
pub fn evaluate<S: Scalar>(spec: &AmplitudeSpec, x: &S) -> Result<S, AmplitudeError> {
    let ctx = x.context();
    let s = S::from_rational(&spec.s(), ctx);
    let alpha = S::from_rational(&spec.alpha, ctx);
    let t = (x.clone() - &S::one(ctx)) * &s / &S::from_int(2, ctx);
    let mut total = S::zero(ctx);
    for k in spec.divisors() {
        let q = spec.q(k)?;
        let z = (alpha.clone() + &t) / &S::from_int(k as i64, ctx);
        let mut term = s.clone() + &t;
        for j in 0..q {
            term *= &(z.clone() + &S::from_int(j as i64, ctx));
        }
        term *= &S::from_mpfr(&spec.term_weight(k, S::working_precision(ctx))?, ctx);
        total += &term;
    }
    Ok(total)
}

/// Smallest coefficient and whether it is negative beyond the noise floor.
#[derive(Debug, Clone, PartialEq)]
pub struct MinCoefficient<S> {
    pub index: usize,
    pub value: S,
    pub is_negative: bool,
}

/// `is_negative` holds when `value < -eta · max_n |a_n|`.
pub fn min_coefficient<S: Scalar>(v: &CoefficientVector<S>, eta: f64) -> MinCoefficient<S> {
    let coeffs = v.coeffs();
    let (index, value) = coeffs
        .iter()
        .enumerate()
        .fold((0, &coeffs[0]), |best, (i, c)| if *c < *best.1 { (i, c) } else { best });
    let floor = -(v.max_abs() * &S::from_f64(eta, v.context()));
    MinCoefficient {
        index,
        value: value.clone(),
        is_negative: *value < floor,
    }
}
