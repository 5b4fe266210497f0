//! Critical-slope search: bisection on the positivity predicate and the
//! `(M, β)` landscape sweep.

use std::convert::Infallible;

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{expand_amplitude, min_coefficient, AmplitudeError, AmplitudeSpec};
use crate::basis::BasisSpec;
use crate::scalar::{rational_from_f64, Precision, Scalar, ScalarError, ScalarMode};

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("invalid bisection config: {0}")]
    InvalidConfig(String),
    #[error("predicate already holds at the lower end alpha = {0}")]
    HoldsAtLowerEnd(f64),
    #[error("predicate fails at the upper end alpha = {0}")]
    FailsAtUpperEnd(f64),
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub epsilon: f64,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            alpha_min: 0.0,
            alpha_max: 1.0,
            epsilon: 1e-6,
        }
    }
}

impl BisectionConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(SearchError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.alpha_min.is_finite() && self.alpha_max.is_finite() && self.alpha_min < self.alpha_max) {
            return Err(SearchError::InvalidConfig(format!(
                "bracket [{}, {}] is empty",
                self.alpha_min, self.alpha_max
            )));
        }
        Ok(())
    }

    /// `⌈log2((alpha_max - alpha_min) / epsilon)⌉`, the number of midpoint
    /// evaluations a full bisection performs.
    pub fn expected_iterations(&self) -> u32 {
        let mut width = self.alpha_max - self.alpha_min;
        let mut n = 0;
        while width > self.epsilon {
            width /= 2.0;
            n += 1;
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionOutcome {
    /// Midpoint of the final bracket.
    pub alpha: f64,
    pub lo: f64,
    pub hi: f64,
    /// Midpoints visited with the predicate value seen there.
    pub steps: Vec<(f64, bool)>,
}

impl BisectionOutcome {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// Bisection without the endpoint check: `hi` moves down to every midpoint
/// where the predicate holds, `lo` moves up otherwise.
pub fn try_bisect_unchecked<E>(
    config: &BisectionConfig,
    mut predicate: impl FnMut(f64) -> Result<bool, E>,
) -> Result<BisectionOutcome, E> {
    let (mut lo, mut hi) = (config.alpha_min, config.alpha_max);
    let mut steps = Vec::new();
    while hi - lo > config.epsilon {
        let mid = 0.5 * (lo + hi);
        let holds = predicate(mid)?;
        steps.push((mid, holds));
        if holds {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BisectionOutcome {
        alpha: 0.5 * (lo + hi),
        lo,
        hi,
        steps,
    })
}

pub fn bisect_unchecked(config: &BisectionConfig, mut predicate: impl FnMut(f64) -> bool) -> BisectionOutcome {
    match try_bisect_unchecked::<Infallible>(config, |a| Ok(predicate(a))) {
        Ok(out) => out,
        Err(never) => match never {},
    }
}

/// Bisection after checking once that the predicate is false at
/// `alpha_min` and true at `alpha_max`.
pub fn try_bisect<E>(
    config: &BisectionConfig,
    mut predicate: impl FnMut(f64) -> Result<bool, E>,
) -> Result<BisectionOutcome, E>
where
    E: From<SearchError>,
{
    config.validate()?;
    if predicate(config.alpha_min)? {
        return Err(SearchError::HoldsAtLowerEnd(config.alpha_min).into());
    }
    if !predicate(config.alpha_max)? {
        return Err(SearchError::FailsAtUpperEnd(config.alpha_max).into());
    }
    try_bisect_unchecked(config, predicate)
}

pub fn bisect(
    config: &BisectionConfig,
    mut predicate: impl FnMut(f64) -> bool,
) -> Result<BisectionOutcome, SearchError> {
    try_bisect(config, |a| Ok::<_, SearchError>(predicate(a)))
}

/// A pair `a < b` with the predicate true at `a` but false at `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityViolation {
    pub holds_at: f64,
    pub fails_at: f64,
}

/// Scans `steps + 1` equally spaced points of the bracket looking for a
/// place where the predicate switches back from true to false.
pub fn scan_monotonicity<E>(
    config: &BisectionConfig,
    steps: usize,
    mut predicate: impl FnMut(f64) -> Result<bool, E>,
) -> Result<Option<MonotonicityViolation>, E> {
    let steps = steps.max(1);
    let width = config.alpha_max - config.alpha_min;
    let mut last_true: Option<f64> = None;
    for i in 0..=steps {
        let a = config.alpha_min + width * i as f64 / steps as f64;
        if predicate(a)? {
            last_true.get_or_insert(a);
        } else if let Some(holds_at) = last_true {
            return Ok(Some(MonotonicityViolation { holds_at, fails_at: a }));
        }
    }
    Ok(None)
}

/// Whether every amplitude coefficient at `alpha` is non-negative up to the
/// relative noise floor `eta`.
pub fn positivity_holds(
    template: &AmplitudeSpec,
    alpha: f64,
    basis: BasisSpec,
    mode: ScalarMode,
    eta: f64,
) -> Result<bool, SearchError> {
    let spec = template.at_alpha(rational_from_f64(alpha)?)?;
    Ok(match mode {
        ScalarMode::ExactRational => holds_in::<Rational>(&spec, basis, (), eta)?,
        ScalarMode::HighPrecisionFloat { digits } => {
            holds_in::<Float>(&spec, basis, Precision::from_digits(digits), eta)?
        }
    })
}

fn holds_in<S: Scalar>(spec: &AmplitudeSpec, basis: BasisSpec, ctx: S::Ctx, eta: f64) -> Result<bool, SearchError> {
    let expansion = expand_amplitude::<S>(spec, basis, ctx)?;
    Ok(!min_coefficient(&expansion.coefficients, eta).is_negative)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalStatus {
    /// Positivity fails at the lower end and holds at the upper end.
    Bracketed,
    /// Positivity already holds at `alpha_min`; the threshold is reported
    /// as `alpha_min`.
    HoldsAtMinimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalAlpha {
    pub alpha: f64,
    pub status: CriticalStatus,
    pub iterations: usize,
}

/// `α_crit(M, β)` for the default coefficient strategy.
pub fn critical_alpha(
    m: u32,
    beta: f64,
    gamma: f64,
    basis: BasisSpec,
    config: &BisectionConfig,
    mode: ScalarMode,
) -> Result<CriticalAlpha, SearchError> {
    let template = AmplitudeSpec::new(m, Rational::from((1, 2)), beta, gamma)?;
    critical_alpha_for(&template, basis, config, mode, mode.default_noise_floor())
}

/// `α_crit` for an arbitrary amplitude template (its `α` is ignored).
pub fn critical_alpha_for(
    template: &AmplitudeSpec,
    basis: BasisSpec,
    config: &BisectionConfig,
    mode: ScalarMode,
    eta: f64,
) -> Result<CriticalAlpha, SearchError> {
    config.validate()?;
    mode.validate()?;
    let predicate = |a: f64| positivity_holds(template, a, basis, mode, eta);
    match try_bisect(config, predicate) {
        Ok(out) => Ok(CriticalAlpha {
            alpha: out.alpha,
            status: CriticalStatus::Bracketed,
            iterations: out.iterations(),
        }),
        Err(SearchError::HoldsAtLowerEnd(a)) => Ok(CriticalAlpha {
            alpha: a,
            status: CriticalStatus::HoldsAtMinimum,
            iterations: 0,
        }),
        Err(e) => Err(e),
    }
}

/// How `γ` follows `β` across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaRule {
    /// `γ = β + offset`; the usual choice is an offset of 1.
    BetaPlus(f64),
    Fixed(f64),
}

impl Default for GammaRule {
    fn default() -> Self {
        GammaRule::BetaPlus(1.0)
    }
}

impl GammaRule {
    pub fn gamma(&self, beta: f64) -> f64 {
        match *self {
            GammaRule::BetaPlus(offset) => beta + offset,
            GammaRule::Fixed(g) => g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "message")]
pub enum CellStatus {
    Ok,
    HoldsAtMinimum,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeCell {
    pub m: u32,
    pub beta: f64,
    pub gamma: f64,
    pub alpha_crit: Option<f64>,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub beta: f64,
    /// `max_M α_crit(M, β)` over the cells that succeeded.
    pub alpha_crit: Option<f64>,
    pub argmax_m: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeMetadata {
    pub epsilon: f64,
    pub m_min: u32,
    pub m_max: u32,
    pub dimension: u32,
    pub mode: ScalarMode,
    pub noise_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeResult {
    /// Cells ordered by `β` (grid order), then by `M` (ascending).
    pub cells: Vec<LandscapeCell>,
    pub profile: Vec<ProfilePoint>,
    pub metadata: LandscapeMetadata,
}

impl LandscapeResult {
    /// Max of `α_crit(M, β)` over `M ∈ [m_lo, m_hi]`.
    pub fn running_max(&self, beta: f64, m_lo: u32, m_hi: u32) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.beta == beta && (m_lo..=m_hi).contains(&c.m))
            .filter_map(|c| c.alpha_crit)
            .reduce(f64::max)
    }

    /// Change in the running max when the window `[m_lo, m_mid]` is widened
    /// to `[m_lo, m_hi]`.
    pub fn stabilization(&self, beta: f64, m_lo: u32, m_mid: u32, m_hi: u32) -> Option<f64> {
        let narrow = self.running_max(beta, m_lo, m_mid)?;
        let wide = self.running_max(beta, m_lo, m_hi)?;
        Some(wide - narrow)
    }
}

/// Sweeps `α_crit` over every `(M, β)` pair. Cell failures are recorded in
/// the cell and do not stop the sweep.
pub fn landscape(
    m_values: &[u32],
    betas: &[f64],
    gamma_rule: GammaRule,
    basis: BasisSpec,
    config: &BisectionConfig,
    mode: ScalarMode,
) -> Result<LandscapeResult, SearchError> {
    if m_values.is_empty() || betas.is_empty() {
        return Err(SearchError::InvalidConfig("landscape ranges must be nonempty".into()));
    }
    config.validate()?;
    mode.validate()?;
    let mut ms = m_values.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let grid: Vec<(f64, u32)> = betas.iter().flat_map(|&b| ms.iter().map(move |&m| (b, m))).collect();
    let cells: Vec<LandscapeCell> = grid
        .par_iter()
        .map(|&(beta, m)| {
            let gamma = gamma_rule.gamma(beta);
            let (alpha_crit, status) = match critical_alpha(m, beta, gamma, basis, config, mode) {
                Ok(CriticalAlpha {
                    alpha,
                    status: CriticalStatus::Bracketed,
                    ..
                }) => (Some(alpha), CellStatus::Ok),
                Ok(CriticalAlpha { alpha, .. }) => (Some(alpha), CellStatus::HoldsAtMinimum),
                Err(e) => (None, CellStatus::Error(describe_failure(&e))),
            };
            LandscapeCell {
                m,
                beta,
                gamma,
                alpha_crit,
                status,
            }
        })
        .collect();
    let profile = betas
        .iter()
        .map(|&beta| {
            let best = cells
                .iter()
                .filter(|c| c.beta == beta)
                .filter_map(|c| c.alpha_crit.map(|a| (a, c.m)))
                .fold(None, |acc: Option<(f64, u32)>, (a, m)| match acc {
                    Some((b, _)) if b >= a => acc,
                    _ => Some((a, m)),
                });
            ProfilePoint {
                beta,
                alpha_crit: best.map(|b| b.0),
                argmax_m: best.map(|b| b.1),
            }
        })
        .collect();
    Ok(LandscapeResult {
        cells,
        profile,
        metadata: LandscapeMetadata {
            epsilon: config.epsilon,
            m_min: ms[0],
            m_max: *ms.last().expect("nonempty"),
            dimension: basis.dimension(),
            mode,
            noise_floor: mode.default_noise_floor(),
        },
    })
}

fn describe_failure(e: &SearchError) -> String {
    match e {
        SearchError::FailsAtUpperEnd(a) => format!("positivity fails even at alpha={a}"),
        SearchError::HoldsAtLowerEnd(a) => format!("positivity holds even at alpha={a}"),
        other => other.to_string(),
    }
}
