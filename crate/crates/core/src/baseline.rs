//! The baseline model: full brightness at onset, exponential fading from a
//! delay until offset, and exponential persistence after offset.
//!
//! Time constants are expressed as durations: `tau(d, i0, ie)` is the constant
//! that takes brightness from `i0` to `ie` in `d` seconds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Grid, Stimulus, TimeCourse, Trial};
use crate::error::{Error, Result};
use crate::model::{mean_mse, FitConfig, FitResult, ModelParams};
use crate::optim::{multistart, Bound};

/// Brightness at onset, before scaling.
pub const I0: f64 = 1.0;
/// Brightness at the end of the fading window, before scaling.
pub const IE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    /// Persistence duration after offset, seconds.
    pub t_per: f64,
    /// Delay from onset until fading begins, seconds.
    pub t_pfo: f64,
    /// Length of the fading window, seconds.
    pub t_pfd: f64,
    /// Output scale.
    pub k: f64,
}

impl BaselineParams {
    pub fn new(t_per: f64, t_pfo: f64, t_pfd: f64, k: f64) -> Result<Self> {
        let p = Self { t_per, t_pfo, t_pfd, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t_per, self.t_pfo, self.t_pfd, self.k];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("baseline parameters must be finite".into()));
        }
        if self.t_per <= 0.0 || self.t_pfd <= 0.0 {
            return Err(Error::Parameter("t_per and t_pfd must be positive".into()));
        }
        if self.t_pfo < 0.0 {
            return Err(Error::Parameter(format!("t_pfo must be nonnegative, got {}", self.t_pfo)));
        }
        if self.k <= 0.0 {
            return Err(Error::Parameter(format!("k must be positive, got {}", self.k)));
        }
        Ok(())
    }
}

/// Time constant taking `i0` down to `ie` over `duration` seconds.
pub fn tau(duration: f64, i0: f64, ie: f64) -> Result<f64> {
    if !(i0 > ie && ie > 0.0) {
        return Err(Error::Argument(format!("tau needs i0 > ie > 0, got i0={i0}, ie={ie}")));
    }
    if !(duration > 0.0) {
        return Err(Error::Argument(format!("tau needs a positive duration, got {duration}")));
    }
    Ok(duration / (i0.ln() - ie.ln()))
}

pub fn baseline_predict(params: &BaselineParams, stimulus: &Stimulus, grid: &Grid) -> Result<TimeCourse> {
    params.validate()?;
    let d = stimulus.duration_s;
    let tau_pfd = tau(params.t_pfd, I0, IE)?;
    let tau_per = tau(params.t_per, I0, IE)?;
    let during = |t: f64| {
        if t < params.t_pfo {
            I0
        } else {
            I0 * (-(t - params.t_pfo) / tau_pfd).exp()
        }
    };
    let at_offset = during(d);

    let out = grid
        .times()
        .map(|t| {
            let v = if t < 0.0 {
                0.0
            } else if t < d {
                during(t)
            } else if t < d + params.t_per {
                at_offset * (-(t - d) / tau_per).exp()
            } else {
                0.0
            };
            params.k * v
        })
        .collect();
    Ok(TimeCourse::from_grid(*grid, out))
}

const K_MAX: f64 = 20.0;
const T_PER_MAX: f64 = 60.0;

/// Encoding is the field order `[t_per, t_pfo, t_pfd, k]`.
fn encode(p: &BaselineParams) -> Vec<f64> {
    vec![p.t_per, p.t_pfo, p.t_pfd, p.k]
}

fn decode(x: &[f64]) -> BaselineParams {
    BaselineParams { t_per: x[0], t_pfo: x[1], t_pfd: x[2], k: x[3] }
}

fn bounds(duration: f64) -> Vec<Bound> {
    vec![
        Bound::Interval(1e-3, T_PER_MAX),
        Bound::Interval(0.0, duration + 10.0),
        Bound::Interval(1e-3, duration + 80.0),
        Bound::Interval(1e-3, K_MAX),
    ]
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

/// Mean peak as the scale; fading that starts early, midway or not at all.
fn heuristic_starts(trials: &[&Trial]) -> Vec<BaselineParams> {
    let n = trials.len() as f64;
    let peak = trials.iter().map(|t| t.observed.peak().max(0.5)).sum::<f64>() / n;
    let d = trials.iter().map(|t| t.stimulus.duration_s).sum::<f64>() / n;
    [(0.5, d), (0.25 * d, 0.5 * d), (d, d)]
        .into_iter()
        .map(|(t_pfo, t_pfd)| BaselineParams { t_per: 2.0, t_pfo, t_pfd, k: peak.min(K_MAX) })
        .collect()
}

fn random_start(rng: &mut ChaCha8Rng, duration: f64) -> BaselineParams {
    BaselineParams {
        t_per: rng.gen_range(0.1..10.0),
        t_pfo: rng.gen_range(0.0..duration),
        t_pfd: rng.gen_range(0.1..duration + 10.0),
        k: rng.gen_range(1.0..12.0),
    }
}

pub fn baseline_fit(trials: &[&Trial], config: &FitConfig) -> Result<FitResult> {
    baseline_fit_with_starts(trials, config, &[])
}

/// As [`baseline_fit`], with caller-supplied starting points tried before the generated ones.
pub fn baseline_fit_with_starts(
    trials: &[&Trial],
    config: &FitConfig,
    extra: &[BaselineParams],
) -> Result<FitResult> {
    let duration = check_trials(trials)?;
    let bounds = bounds(duration);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts: Vec<BaselineParams> = extra.to_vec();
    starts.extend(heuristic_starts(trials));
    starts.extend((0..config.restarts).map(|_| random_start(&mut rng, duration)));
    let starts: Vec<Vec<f64>> = starts.iter().map(encode).collect();

    let objective = |x: &[f64]| mean_mse(trials, |t, grid| baseline_predict(&decode(x), &t.stimulus, grid));
    let fit = multistart(&objective, &starts, &bounds, &config.opt)?;
    Ok(FitResult {
        params: ModelParams::Baseline(decode(&fit.x_best)),
        objective: fit.f_best,
        initial_objective: fit.f_first,
        n_trials: trials.len(),
        runs: fit.runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid {
        Grid::new(0.0, 0.25, 121).unwrap()
    }

    fn stim() -> Stimulus {
        Stimulus::new(20.0, 10.0).unwrap()
    }

    #[test]
    fn tau_values() {
        assert_abs_diff_eq!(tau(3.912, 1.0, 0.02).unwrap(), 3.912 / 50f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(tau(3.912, 1.0, 0.02).unwrap(), 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(tau(10.0, 1.0, 0.02).unwrap(), 2.5562, epsilon = 1e-4);
        assert_abs_diff_eq!(tau(4.0, std::f64::consts::E * 0.3, 0.3).unwrap(), 4.0, epsilon = 1e-12);
        assert!(matches!(tau(1.0, 0.02, 1.0), Err(Error::Argument(_))));
        assert!(matches!(tau(1.0, 0.5, 0.5), Err(Error::Argument(_))));
    }

    #[test]
    fn shape_over_a_trial() {
        let p = BaselineParams::new(3.0, 1.0, 4.0, 8.0).unwrap();
        let out = baseline_predict(&p, &stim(), &grid()).unwrap();
        let s = out.samples();
        assert_eq!(s[0], 8.0);
        assert_eq!(s[3], 8.0);
        // End of the fading window: k·Ie; fading continues until offset.
        assert_abs_diff_eq!(s[20], 8.0 * IE, epsilon = 1e-12);
        let at_offset = 8.0 * (-9.0 * 50f64.ln() / 4.0).exp();
        assert!(s[30] < s[20]);
        // Persistence after offset starts from the offset value, then dark.
        assert_abs_diff_eq!(s[40], at_offset, epsilon = 1e-12);
        assert!(s[44] < s[40]);
        assert!(s[52..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fading_ratio_is_ie_over_i0() {
        let p = BaselineParams::new(2.0, 0.0, 5.0, 1.0).unwrap();
        let long = Stimulus::new(20.0, 60.0).unwrap();
        let out = baseline_predict(&p, &long, &Grid::new(0.0, 0.25, 40).unwrap()).unwrap();
        let t = 4.75;
        assert_abs_diff_eq!(out.samples()[19], (-t * 50f64.ln() / 5.0).exp(), epsilon = 1e-12);
    }

    #[test]
    fn scale_is_linear_and_output_nonnegative() {
        let a = BaselineParams::new(2.0, 0.5, 6.0, 1.0).unwrap();
        let b = BaselineParams { k: 3.5, ..a };
        let pa = baseline_predict(&a, &stim(), &grid()).unwrap();
        let pb = baseline_predict(&b, &stim(), &grid()).unwrap();
        for (x, y) in pa.samples().iter().zip(pb.samples()) {
            assert!(*x >= 0.0);
            assert_abs_diff_eq!(3.5 * x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn offset_before_fading_persists_from_full_brightness() {
        let p = BaselineParams::new(4.0, 20.0, 5.0, 2.0).unwrap();
        let out = baseline_predict(&p, &stim(), &grid()).unwrap();
        assert_eq!(out.samples()[39], 2.0);
        assert_eq!(out.samples()[40], 2.0);
        assert_abs_diff_eq!(out.samples()[44], 2.0 * (-50f64.ln() / 4.0).exp(), epsilon = 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(BaselineParams::new(0.0, 1.0, 1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(BaselineParams::new(1.0, -1.0, 1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(BaselineParams::new(1.0, 1.0, 1.0, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(BaselineParams::new(1.0, 1.0, f64::NAN, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn json_field_names() {
        let v = serde_json::to_value(BaselineParams::new(1.0, 2.0, 3.0, 4.0).unwrap()).unwrap();
        assert_eq!(v, serde_json::json!({"t_per": 1.0, "t_pfo": 2.0, "t_pfd": 3.0, "k": 4.0}));
    }

    #[test]
    fn single_sample_trial_is_insufficient() {
        let trial = Trial {
            subject_id: 1,
            stimulus: stim(),
            observed: TimeCourse::new(0.0, 0.25, vec![1.0]).unwrap(),
        };
        let err = baseline_fit(&[&trial], &FitConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Fit(ref m) if m.contains("insufficient data")));
    }

    #[test]
    fn recovers_synthetic_trial() {
        let p = BaselineParams::new(3.0, 1.5, 6.0, 7.0).unwrap();
        let observed = baseline_predict(&p, &stim(), &grid()).unwrap();
        let trial = Trial { subject_id: 1, stimulus: stim(), observed };
        let fit = baseline_fit(&[&trial], &FitConfig::default()).unwrap();
        assert!(fit.objective < 1e-4, "objective {}", fit.objective);
        assert!(fit.objective <= fit.initial_objective);
    }
}
