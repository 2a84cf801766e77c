//! Model-family dispatch and the fit record shared by all three models.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baseline::{baseline_fit, baseline_predict, BaselineParams};
use crate::data::{Grid, Stimulus, TimeCourse, Trial};
use crate::error::{Error, Result};
use crate::exponential::{exp_fit, exp_predict, ExpParams};
use crate::metrics;
use crate::optim::{OptOptions, OptResult};
use crate::spectral::{spectral_fit_descriptive, spectral_fit_predictive, spectral_predict, SpectralParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Spectral { m: usize },
    Exponential,
    Baseline,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Spectral { .. } => "spectral",
            ModelKind::Exponential => "exponential",
            ModelKind::Baseline => "baseline",
        }
    }

    /// Parses `spectral`, `exponential` or `baseline`; `m` applies to spectral only.
    pub fn parse(name: &str, m: usize) -> Result<Self> {
        match name {
            "spectral" => Ok(ModelKind::Spectral { m }),
            "exponential" => Ok(ModelKind::Exponential),
            "baseline" => Ok(ModelKind::Baseline),
            other => Err(Error::Argument(format!("unknown model {other:?}"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Spectral { m } => write!(f, "spectral(m={m})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 2)
    }
}

/// Learned parameters of any model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Spectral(SpectralParams),
    Exponential(ExpParams),
    Baseline(BaselineParams),
}

impl ModelParams {
    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::Spectral(_) => "spectral",
            ModelParams::Exponential(_) => "exponential",
            ModelParams::Baseline(_) => "baseline",
        }
    }

    pub fn predict(&self, stimulus: &Stimulus, grid: &Grid) -> Result<TimeCourse> {
        match self {
            ModelParams::Spectral(p) => spectral_predict(p, stimulus, grid),
            ModelParams::Exponential(p) => exp_predict(p, stimulus, grid),
            ModelParams::Baseline(p) => baseline_predict(p, stimulus, grid),
        }
    }
}

/// Optimizer budget and multi-start settings applied uniformly to every fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub opt: OptOptions,
    /// Random starts for the exponential and baseline fits.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { opt: OptOptions::default(), restarts: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ModelParams,
    /// Mean per-trial MSE at `params`.
    pub objective: f64,
    /// Mean per-trial MSE at the deterministic initialization.
    pub initial_objective: f64,
    pub n_trials: usize,
    pub runs: Vec<OptResult>,
}

/// Mean over trials of the per-trial MSE; any prediction error counts as +inf.
///
/// Predictions depend only on the stimulus and the grid, so trials sharing both
/// reuse one prediction.
pub fn mean_mse<F>(trials: &[&Trial], predict: F) -> f64
where
    F: Fn(&Trial, &Grid) -> Result<TimeCourse>,
{
    type Key = (u64, u64, u64, u64, usize);
    let key = |t: &Trial| -> Key {
        let g = t.observed.grid();
        (t.stimulus.freq_pps.to_bits(), t.stimulus.duration_s.to_bits(), g.t0.to_bits(), g.dt.to_bits(), g.len)
    };
    let mut cache: Vec<(Key, TimeCourse)> = Vec::new();
    let mut total = 0.0;
    for t in trials {
        let k = key(t);
        let idx = match cache.iter().position(|(ck, _)| *ck == k) {
            Some(i) => i,
            None => match predict(t, &t.observed.grid()) {
                Ok(p) => {
                    cache.push((k, p));
                    cache.len() - 1
                }
                Err(_) => return f64::INFINITY,
            },
        };
        match metrics::mse(cache[idx].1.samples(), t.observed.samples()) {
            Ok(v) if v.is_finite() => total += v,
            _ => return f64::INFINITY,
        }
    }
    total / trials.len() as f64
}

/// Fit of one trial on its own.
pub fn fit_descriptive(kind: ModelKind, trial: &Trial, config: &FitConfig) -> Result<FitResult> {
    match kind {
        ModelKind::Spectral { m } => spectral_fit_descriptive(trial, m, config),
        ModelKind::Exponential => exp_fit(&[trial], config),
        ModelKind::Baseline => baseline_fit(&[trial], config),
    }
}

/// One parameter set for all of `trials`.
pub fn fit_predictive(kind: ModelKind, trials: &[&Trial], config: &FitConfig) -> Result<FitResult> {
    match kind {
        ModelKind::Spectral { m } => spectral_fit_predictive(trials, m, config),
        ModelKind::Exponential => exp_fit(trials, config),
        ModelKind::Baseline => baseline_fit(trials, config),
    }
}
