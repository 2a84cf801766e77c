//! The exponential model: six segments split at `t1..t5`.
//!
//! | segment      | value                                      |
//! |--------------|--------------------------------------------|
//! | `[0, t1)`    | 0                                          |
//! | `[t1, t2)`   | `k1·(t − t1)`                              |
//! | `[t2, t3)`   | `I[t−1]·exp(−k2·(t − t2)·f^¼)`             |
//! | `[t3, t4)`   | `I[t−1]·exp(−k3·(t − t3))`                 |
//! | `[t4, t5)`   | `I[t−1]·k4·sin(k5·(t − t4))`               |
//! | `[t5, ∞)`    | `I[t−1]·exp(−k3·(t − t5))`                 |
//!
//! `I[t−1]` is the previous grid sample, so each decay factor is re-applied at
//! every step with the elapsed time since the segment start. Values are
//! clamped at zero after every step and the recursion continues from there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Grid, Stimulus, TimeCourse, Trial};
use crate::error::{Error, Result};
use crate::model::{mean_mse, FitConfig, FitResult, ModelParams};
use crate::optim::{multistart, Bound};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpParams {
    /// `[k1, k2, k3, k4, k5]`
    pub k: [f64; 5],
    /// `[t1, t2, t3, t4, t5]`, nondecreasing.
    pub t: [f64; 5],
}

impl ExpParams {
    pub fn new(k: [f64; 5], t: [f64; 5]) -> Result<Self> {
        let p = Self { k, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.iter().chain(&self.t).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("exponential parameters must be finite".into()));
        }
        if self.t[0] < 0.0 || self.t.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Parameter(format!("time points must satisfy 0 <= t1 <= ... <= t5, got {:?}", self.t)));
        }
        if self.k[0] <= 0.0 {
            return Err(Error::Parameter(format!("k1 must be positive, got {}", self.k[0])));
        }
        if self.k[1] < 0.0 || self.k[2] < 0.0 {
            return Err(Error::Parameter("decay rates k2, k3 must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Evaluates the recursion on `grid`.
///
/// Each boundary owns the grid sample nearest to it (ties to the earlier sample).
pub fn exp_predict(params: &ExpParams, stimulus: &Stimulus, grid: &Grid) -> Result<TimeCourse> {
    params.validate()?;
    if !(stimulus.freq_pps > 0.0) {
        return Err(Error::Argument(format!("stimulus frequency must be positive, got {}", stimulus.freq_pps)));
    }
    let [k1, k2, k3, k4, k5] = params.k;
    let [t1, t2, t3, t4, t5] = params.t;
    let idx = params.t.map(|ti| grid.nearest_index(ti));
    let rate2 = k2 * stimulus.freq_pps.powf(0.25);

    let mut out = Vec::with_capacity(grid.len);
    let mut prev = 0.0;
    for j in 0..grid.len {
        let t = grid.time(j);
        let i = j as i64;
        let v = if i < idx[0] || t < 0.0 {
            0.0
        } else if i < idx[1] {
            k1 * (t - t1)
        } else if i < idx[2] {
            prev * (-rate2 * (t - t2).max(0.0)).exp()
        } else if i < idx[3] {
            prev * (-k3 * (t - t3).max(0.0)).exp()
        } else if i < idx[4] {
            prev * k4 * (k5 * (t - t4)).sin()
        } else {
            prev * (-k3 * (t - t5).max(0.0)).exp()
        };
        prev = v.max(0.0);
        out.push(prev);
    }
    Ok(TimeCourse::from_grid(*grid, out))
}

const K_BOUNDS: [(f64, f64); 5] = [(1e-3, 40.0), (0.0, 5.0), (0.0, 5.0), (0.0, 5.0), (0.0, 4.0 * std::f64::consts::PI)];
const T1_MAX: f64 = 5.0;

/// Unconstrained-by-order encoding: `[k1..k5, t1, t2−t1, t3−t2, t4−t3, t5−t4]`.
fn encode(p: &ExpParams) -> [f64; 10] {
    let mut x = [0.0; 10];
    x[..5].copy_from_slice(&p.k);
    x[5] = p.t[0];
    for i in 1..5 {
        x[5 + i] = p.t[i] - p.t[i - 1];
    }
    x
}

fn decode(x: &[f64]) -> ExpParams {
    let mut k = [0.0; 5];
    k.copy_from_slice(&x[..5]);
    let mut t = [0.0; 5];
    t[0] = x[5].max(0.0);
    for i in 1..5 {
        t[i] = t[i - 1] + x[5 + i].max(0.0);
    }
    ExpParams { k, t }
}

fn bounds(span: f64) -> Vec<Bound> {
    let mut b: Vec<Bound> = K_BOUNDS.iter().map(|&(lo, hi)| Bound::Interval(lo, hi)).collect();
    b.push(Bound::Interval(0.0, T1_MAX));
    b.extend([Bound::Interval(0.0, span); 4]);
    b
}

fn check_trials(trials: &[&Trial]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::Argument("no trials to fit".into()));
    }
    if trials.iter().any(|t| t.observed.len() < 2) {
        return Err(Error::Fit("insufficient data: a trial has fewer than 2 samples".into()));
    }
    if trials.iter().all(|t| t.observed.peak() <= 0.0) {
        return Err(Error::Fit("degenerate trial: no positive brightness".into()));
    }
    Ok(trials.iter().map(|t| t.stimulus.duration_s).fold(0.0, f64::max))
}

/// Data-driven starting points: linear rise to the mean peak, then slow, medium and fast fading.
fn heuristic_starts(trials: &[&Trial]) -> Vec<ExpParams> {
    let n = trials.len() as f64;
    let peak = trials.iter().map(|t| t.observed.peak().max(0.5)).sum::<f64>() / n;
    let t_peak = trials
        .iter()
        .map(|t| {
            let s = t.observed.samples();
            let i = s.iter().position(|v| *v == t.observed.peak()).unwrap_or(0);
            t.observed.time(i).max(0.25)
        })
        .sum::<f64>()
        / n;
    let offset = trials.iter().map(|t| t.stimulus.duration_s).sum::<f64>() / n;
    let plateau_end = offset.max(t_peak);
    [0.005, 0.02, 0.08]
        .into_iter()
        .map(|k2| ExpParams {
            k: [peak / t_peak, k2, 0.1, 0.0, 1.0],
            t: [0.0, t_peak, plateau_end, plateau_end, plateau_end],
        })
        .collect()
}

fn random_start(rng: &mut ChaCha8Rng, duration: f64) -> ExpParams {
    let k = [
        rng.gen_range(1.0..20.0),
        rng.gen_range(0.0..5.0),
        rng.gen_range(0.0..5.0),
        rng.gen_range(0.0..3.0),
        rng.gen_range(0.1..6.3),
    ];
    let mut t = [0.0; 5];
    t[0] = rng.gen_range(0.0..1.0);
    for i in 1..5 {
        t[i] = t[i - 1] + rng.gen_range(0.0..duration + 10.0);
    }
    ExpParams { k, t }
}

/// Mean-MSE fit of one parameter set to `trials`.
pub fn exp_fit(trials: &[&Trial], config: &FitConfig) -> Result<FitResult> {
    exp_fit_with_starts(trials, config, &[])
}

/// As [`exp_fit`], with caller-supplied starting points tried before the generated ones.
pub fn exp_fit_with_starts(trials: &[&Trial], config: &FitConfig, extra: &[ExpParams]) -> Result<FitResult> {
    let duration = check_trials(trials)?;
    let bounds = bounds(duration + 20.0);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts: Vec<ExpParams> = extra.to_vec();
    starts.extend(heuristic_starts(trials));
    starts.extend((0..config.restarts).map(|_| random_start(&mut rng, duration)));
    let starts: Vec<Vec<f64>> = starts.iter().map(|p| encode(p).to_vec()).collect();

    let objective = |x: &[f64]| mean_mse(trials, |t, grid| exp_predict(&decode(x), &t.stimulus, grid));
    let fit = multistart(&objective, &starts, &bounds, &config.opt)?;
    Ok(FitResult {
        params: ModelParams::Exponential(decode(&fit.x_best)),
        objective: fit.f_best,
        initial_objective: fit.f_first,
        n_trials: trials.len(),
        runs: fit.runs,
    })
}
