//! Fully resolved run descriptions. Every run echoes one of these so that
//! `legpos replay` can reproduce it.

use legpos_core::schoenberg::SchoenbergConfig;
use legpos_core::search::GammaRule;
use legpos_core::ScalarMode;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: ScalarMode,
    pub seed: u64,
    pub format: Format,
    pub command: CommandConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name", content = "params")]
pub enum CommandConfig {
    Expand(AmplitudeParams),
    CriticalAlpha(CriticalAlphaParams),
    Landscape(LandscapeParams),
    Schoenberg(SchoenbergConfig),
    QuadCheck(QuadCheckParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeParams {
    pub m: u32,
    /// Kept as text so exact values such as `1/3` survive a replay.
    pub alpha: String,
    pub beta: f64,
    pub gamma: f64,
    pub d: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalAlphaParams {
    pub m: u32,
    pub beta: f64,
    pub gamma: f64,
    pub d: u32,
    pub epsilon: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeParams {
    pub m_min: u32,
    pub m_max: u32,
    pub m_step: u32,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_steps: u32,
    pub gamma: GammaRule,
    pub epsilon: f64,
    pub d: u32,
}

impl LandscapeParams {
    pub fn m_values(&self) -> Vec<u32> {
        (self.m_min..=self.m_max).step_by(self.m_step.max(1) as usize).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        if self.beta_steps <= 1 {
            return vec![self.beta_min];
        }
        let span = self.beta_max - self.beta_min;
        let last = f64::from(self.beta_steps - 1);
        (0..self.beta_steps)
            .map(|i| self.beta_min + span * f64::from(i) / last)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadCheckParams {
    pub m: u32,
    pub alpha: String,
    pub beta: f64,
    pub gamma: f64,
    pub d: u32,
    pub nodes: usize,
    pub tolerance: f64,
}

impl QuadCheckParams {
    pub fn amplitude(&self) -> AmplitudeParams {
        AmplitudeParams {
            m: self.m,
            alpha: self.alpha.clone(),
            beta: self.beta,
            gamma: self.gamma,
            d: self.d,
        }
    }
}

/// Accepts either a bare [`RunConfig`] or a full JSON result document that
/// embeds one under `config`.
pub fn parse_replay(text: &str) -> Result<RunConfig, serde_json::Error> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("config") {
        Some(config) => serde_json::from_value(config.clone()),
        None => serde_json::from_value(value),
    }
}
