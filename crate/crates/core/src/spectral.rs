//! The spectral model.
//!
//! Brightness rises linearly from onset to `k1` at `t1`, joins the decay
//! curve at its first local maximum `t2` through a straight connector, follows
//! a truncated cosine series plus bias `k2` until the extinction time `t3`,
//! and is exactly zero afterwards.
//!
//! The cosine series is seeded from the largest-magnitude bins of a DFT of
//! the observed decay window; the DC bin is left to `k2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::{Grid, Stimulus, TimeCourse, Trial, TIME_EPS};
use crate::error::{Error, Result};
use crate::model::{mean_mse, FitConfig, FitResult, ModelParams};
use crate::optim::{minimize_chain, Bound, OptResult};

pub const DEFAULT_K1: f64 = 10.0;
pub const DEFAULT_T1: f64 = 1.0;
pub const MAX_COMPONENTS: usize = 8;

/// Fraction of peak brightness below which a trace counts as extinguished.
pub const FLATLINE_FRACTION: f64 = 0.02;

/// Forward DFT, `X[k] = Σ x[i] exp(-2πi·k·i/n)`.
///
/// Radix-2 for power-of-two lengths, direct summation with a twiddle table otherwise.
pub fn dft(samples: &[f64]) -> Result<Vec<Complex64>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Argument(format!("dft needs at least 2 samples, got {n}")));
    }
    let input: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(transform(input, -1.0))
}

/// Inverse DFT with 1/n normalization.
pub fn idft(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = spectrum.len();
    if n < 2 {
        return Err(Error::Argument(format!("idft needs at least 2 bins, got {n}")));
    }
    let scale = 1.0 / n as f64;
    Ok(transform(spectrum.to_vec(), 1.0).into_iter().map(|z| z * scale).collect())
}

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let theta = sign * 2.0 * PI * k as f64 / n as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

fn transform(mut data: Vec<Complex64>, sign: f64) -> Vec<Complex64> {
    let n = data.len();
    let table = twiddles(n, sign);
    if n.is_power_of_two() {
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let w = table[k * stride];
                    let a = data[start + k];
                    let b = data[start + k + len / 2] * w;
                    data[start + k] = a + b;
                    data[start + k + len / 2] = a - b;
                }
            }
            len <<= 1;
        }
        data
    } else {
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, x) in data.iter().enumerate() {
                    acc += x * table[(k * i) % n];
                }
                acc
            })
            .collect()
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let wrapped = phase - 2.0 * PI * ((phase + PI) / (2.0 * PI)).floor();
    if wrapped >= PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// One real cosine term `amplitude · cos(2π·freq_hz·t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComponent {
    pub freq_hz: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl SpectrumComponent {
    pub fn new(freq_hz: f64, amplitude: f64, phase: f64) -> Result<Self> {
        if !(freq_hz >= 0.0 && freq_hz.is_finite()) {
            return Err(Error::Parameter(format!("component frequency must be >= 0, got {freq_hz}")));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Parameter(format!("component amplitude must be >= 0, got {amplitude}")));
        }
        if !phase.is_finite() {
            return Err(Error::Parameter("component phase must be finite".into()));
        }
        Ok(Self { freq_hz, amplitude, phase: wrap_phase(phase) })
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.freq_hz * t + self.phase).cos()
    }
}

/// Converts the `m` strongest positive-frequency bins (DC excluded) into cosine components.
///
/// Bins are ranked by magnitude; equal magnitudes go to the lower frequency.
pub fn top_m_components(spectrum: &[Complex64], m: usize, dt: f64) -> Result<Vec<SpectrumComponent>> {
    let n = spectrum.len();
    let available = n / 2;
    if m < 1 || m > available {
        return Err(Error::Argument(format!(
            "m must lie in [1, {available}] for a {n}-point spectrum, got {m}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    let mut bins: Vec<usize> = (1..=available).collect();
    bins.sort_by(|&a, &b| spectrum[b].norm().total_cmp(&spectrum[a].norm()).then(a.cmp(&b)));
    Ok(bins
        .into_iter()
        .take(m)
        .map(|k| {
            let x = spectrum[k];
            let weight = if 2 * k == n { 1.0 } else { 2.0 };
            SpectrumComponent {
                freq_hz: k as f64 / (n as f64 * dt),
                amplitude: weight * x.norm() / n as f64,
                phase: wrap_phase(x.arg()),
            }
        })
        .collect())
}

/// `k2 + Σ amplitude·cos(2π·freq·t + phase)`.
pub fn eval_series(components: &[SpectrumComponent], k2: f64, t: f64) -> f64 {
    components.iter().fold(k2, |acc, c| acc + c.value(t))
}

/// [`eval_series`] at `t_first + i·dt` for `i < n`.
///
/// Each component advances by a fixed rotation per step, re-anchored with an
/// exact evaluation every 32 steps to keep rounding drift below 1e-13.
pub fn eval_series_uniform(components: &[SpectrumComponent], k2: f64, t_first: f64, dt: f64, n: usize) -> Vec<f64> {
    const RESYNC: usize = 32;
    let mut out = vec![k2; n];
    for c in components {
        let omega = 2.0 * PI * c.freq_hz;
        let (step_sin, step_cos) = (omega * dt).sin_cos();
        let mut start = 0;
        while start < n {
            let end = (start + RESYNC).min(n);
            let (mut s, mut co) = (omega * (t_first + start as f64 * dt) + c.phase).sin_cos();
            for v in &mut out[start..end] {
                *v += c.amplitude * co;
                let next_co = co * step_cos - s * step_sin;
                s = s * step_cos + co * step_sin;
                co = next_co;
            }
            start = end;
        }
    }
    out
}

/// First interior sample at or after `start` that is >= both neighbours, else `start`.
pub fn first_local_max(samples: &[f64], start: usize) -> usize {
    let n = samples.len();
    (start.max(1)..n.saturating_sub(1))
        .find(|&i| samples[i] >= samples[i - 1] && samples[i] >= samples[i + 1])
        .unwrap_or(start)
}

/// Reference point of the extinction time `t3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum T3Anchor {
    /// `t3` is seconds after stimulus onset.
    #[default]
    Onset,
    /// `t3` is seconds after stimulus offset, clamped to `[t1 + dt, grid end]`.
    Offset,
}

impl T3Anchor {
    fn is_onset(&self) -> bool {
        *self == T3Anchor::Onset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub k1: f64,
    pub t1: f64,
    pub k2: f64,
    pub t3: f64,
    pub components: Vec<SpectrumComponent>,
    #[serde(default, skip_serializing_if = "T3Anchor::is_onset")]
    pub t3_anchor: T3Anchor,
}

impl SpectralParams {
    pub fn new(k1: f64, t1: f64, k2: f64, t3: f64, components: Vec<SpectrumComponent>) -> Result<Self> {
        let p = Self { k1, t1, k2, t3, components, t3_anchor: T3Anchor::Onset };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(Error::Parameter(format!("k1 must be positive, got {}", self.k1)));
        }
        if !(self.t1 > 0.0 && self.t1.is_finite()) {
            return Err(Error::Parameter(format!("t1 must be positive, got {}", self.t1)));
        }
        if !self.k2.is_finite() || !self.t3.is_finite() {
            return Err(Error::Parameter("k2 and t3 must be finite".into()));
        }
        if self.t3_anchor == T3Anchor::Onset && self.t3 <= self.t1 {
            return Err(Error::Parameter(format!("t3 ({}) must exceed t1 ({})", self.t3, self.t1)));
        }
        if self.components.len() > MAX_COMPONENTS {
            return Err(Error::Parameter(format!(
                "at most {MAX_COMPONENTS} components allowed, got {}",
                self.components.len()
            )));
        }
        for c in &self.components {
            SpectrumComponent::new(c.freq_hz, c.amplitude, c.phase)?;
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    /// Extinction time in seconds after onset for this stimulus and grid.
    pub fn extinction_time(&self, stimulus: &Stimulus, grid: &Grid) -> f64 {
        match self.t3_anchor {
            T3Anchor::Onset => self.t3,
            T3Anchor::Offset => {
                let lo = self.t1 + grid.dt;
                let hi = grid.end_time().max(lo);
                (stimulus.duration_s + self.t3).clamp(lo, hi)
            }
        }
    }
}

/// Evaluates the piecewise spectral model on `grid`.
pub fn spectral_predict(params: &SpectralParams, stimulus: &Stimulus, grid: &Grid) -> Result<TimeCourse> {
    let t3 = params.extinction_time(stimulus, grid);
    if !(t3 > params.t1) {
        return Err(Error::Parameter(format!("t3 ({t3}) must exceed t1 ({})", params.t1)));
    }
    let (k1, t1) = (params.k1, params.t1);
    let i1 = grid.first_index_at_or_after(t1);
    let i3 = grid.first_index_at_or_after(t3).max(i1);
    let decay = eval_series_uniform(&params.components, params.k2, grid.time(i1) - t1, grid.dt, i3 - i1);
    let i2 = if decay.is_empty() { i1 } else { i1 + first_local_max(&decay, 0) };
    let t2 = grid.time(i2);

    let samples = (0..grid.len)
        .map(|i| {
            let t = grid.time(i);
            let v = if i >= i3 || t < -TIME_EPS {
                0.0
            } else if i < i1 {
                k1 * t / t1
            } else if i < i2 {
                let target = decay[i2 - i1];
                k1 + (target - k1) * (t - t1) / (t2 - t1)
            } else {
                decay[i - i1]
            };
            v.max(0.0)
        })
        .collect();
    Ok(TimeCourse::from_grid(*grid, samples))
}

/// Time after which the trace stays below 2% of its peak: the grid time following
/// the last sample at or above that level (one step past the grid end if it never drops).
pub fn flatline_time(tc: &TimeCourse) -> f64 {
    let s = tc.samples();
    let peak = tc.peak();
    let threshold = FLATLINE_FRACTION * peak;
    let peak_idx = s.iter().position(|v| *v == peak).unwrap_or(0);
    let last_above = (peak_idx..s.len()).rev().find(|&i| s[i] >= threshold).unwrap_or(peak_idx);
    tc.time(last_above + 1)
}

fn decay_window(curve: &[f64], grid: &Grid, t1: f64, t3: f64) -> Result<(usize, usize)> {
    let i1 = grid.first_index_at_or_after(t1);
    if grid.len < i1 + 2 {
        return Err(Error::Fit("insufficient data: fewer than 2 samples after t1".into()));
    }
    let i3 = grid.first_index_at_or_after(t3).clamp(i1 + 2, curve.len());
    Ok((i1, i3))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn check_m(m: usize) -> Result<()> {
    if !(1..=MAX_COMPONENTS).contains(&m) {
        return Err(Error::Argument(format!("m must lie in [1, {MAX_COMPONENTS}], got {m}")));
    }
    Ok(())
}

fn trial_mse(params: &SpectralParams, trial: &Trial) -> f64 {
    mean_mse(std::slice::from_ref(&trial), |t, grid| spectral_predict(params, &t.stimulus, grid))
}

/// Descriptive fit of one trial: components from the DFT of the observed decay
/// window, then `k2` and `t3` refined. The fit for `m` also considers the
/// `m - 1` optimum padded with a zero-amplitude component, so training error
/// never increases with `m`.
pub fn spectral_fit_descriptive(trial: &Trial, m: usize, config: &FitConfig) -> Result<FitResult> {
    check_m(m)?;
    let obs = &trial.observed;
    if obs.peak() <= 0.0 {
        return Err(Error::Fit("degenerate trial: no positive brightness".into()));
    }
    let grid = obs.grid();
    let t3_init = flatline_time(obs);
    let (i1, i3) = decay_window(obs.samples(), &grid, DEFAULT_T1, t3_init)?;
    let window = &obs.samples()[i1..i3];
    let spectrum = dft(window)?;
    let m_eff = m.min(window.len() / 2);
    let components = top_m_components(&spectrum, m_eff, grid.dt)?;
    let init = SpectralParams::new(DEFAULT_K1, DEFAULT_T1, mean(window), t3_init.max(DEFAULT_T1 + grid.dt), components)?;

    let previous = if m_eff > 1 { Some(spectral_fit_descriptive(trial, m_eff - 1, config)?) } else { None };

    let t3_bound = Bound::Interval(DEFAULT_T1 + grid.dt, grid.end_time() + grid.dt);
    let bounds = [Bound::Free, t3_bound];
    let objective = |x: &[f64]| {
        let mut p = init.clone();
        p.k2 = x[0];
        p.t3 = x[1];
        trial_mse(&p, trial)
    };

    let initial_objective = trial_mse(&init, trial);
    let mut starts = vec![[init.k2, init.t3]];
    let mut best: (SpectralParams, f64) = (init.clone(), initial_objective);
    let mut runs: Vec<OptResult> = Vec::new();

    if let Some(prev) = &previous {
        if let ModelParams::Spectral(pp) = &prev.params {
            starts.push([pp.k2, pp.t3]);
            let mut padded = pp.clone();
            padded.components.push(SpectrumComponent { amplitude: 0.0, ..init.components[m_eff - 1] });
            let f = trial_mse(&padded, trial);
            if f < best.1 {
                best = (padded, f);
            }
        }
    }

    for start in starts {
        let chain = minimize_chain(&objective, &start, &bounds, &config.opt)?;
        if chain.f_best < best.1 {
            let mut p = init.clone();
            p.k2 = chain.x_best[0];
            p.t3 = chain.x_best[1];
            best = (p, chain.f_best);
        }
        runs.extend(chain.runs);
    }

    Ok(FitResult {
        params: ModelParams::Spectral(best.0),
        objective: best.1,
        initial_objective,
        n_trials: 1,
        runs,
    })
}

/// Mean of the training curves aligned at onset; a bin averages only the trials that reach it.
pub fn mean_curve(trials: &[&Trial]) -> Result<TimeCourse> {
    let dt = trials
        .first()
        .ok_or_else(|| Error::Argument("empty training set".into()))?
        .observed
        .dt();
    let mut sum: Vec<f64> = Vec::new();
    let mut count: Vec<usize> = Vec::new();
    for t in trials {
        let obs = &t.observed;
        for (i, v) in obs.samples().iter().enumerate() {
            let time = obs.time(i);
            if time < -TIME_EPS {
                continue;
            }
            let bin = (time / dt).round() as usize;
            if bin >= sum.len() {
                sum.resize(bin + 1, 0.0);
                count.resize(bin + 1, 0);
            }
            sum[bin] += v;
            count[bin] += 1;
        }
    }
    let samples: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, c)| if *c > 0 { s / *c as f64 } else { 0.0 })
        .collect();
    TimeCourse::new(0.0, dt, samples)
}

struct PredictiveLayout {
    m: usize,
    max_freq: f64,
    anchor: T3Anchor,
    t3_range: (f64, f64),
}

impl PredictiveLayout {
    fn bounds(&self) -> Vec<Bound> {
        let mut b = vec![Bound::Interval(-20.0, 20.0), Bound::Interval(self.t3_range.0, self.t3_range.1)];
        for _ in 0..self.m {
            b.extend([Bound::Interval(0.0, self.max_freq), Bound::Interval(0.0, 20.0), Bound::Free]);
        }
        b
    }

    fn encode(&self, p: &SpectralParams) -> Vec<f64> {
        let (lo, hi) = self.t3_range;
        let margin = 1e-3 * (hi - lo);
        let mut x = vec![p.k2.clamp(-19.9, 19.9), p.t3.clamp(lo + margin, hi - margin)];
        for c in &p.components {
            x.extend([c.freq_hz.min(self.max_freq * 0.999), c.amplitude.min(19.9), c.phase]);
        }
        x
    }

    fn decode(&self, x: &[f64]) -> SpectralParams {
        let components = x[2..]
            .chunks(3)
            .map(|c| SpectrumComponent { freq_hz: c[0].max(0.0), amplitude: c[1].max(0.0), phase: wrap_phase(c[2]) })
            .collect();
        SpectralParams {
            k1: DEFAULT_K1,
            t1: DEFAULT_T1,
            k2: x[0],
            t3: x[1],
            components,
            t3_anchor: self.anchor,
        }
    }
}

/// Predictive fit over several trials; see [`spectral_fit_predictive_path`].
pub fn spectral_fit_predictive(training: &[&Trial], m: usize, config: &FitConfig) -> Result<FitResult> {
    check_m(m)?;
    let mut path = spectral_fit_predictive_path(training, m, config)?;
    Ok(path.pop().expect("path has m entries"))
}

/// Predictive fits for every component count `1..=m_max`.
///
/// One parameter set is shared by all training trials: the cosine series is
/// free (frequency, amplitude, phase per component), seeded from the DFT of
/// the mean training curve, and `t3` is measured from stimulus offset. Level
/// `m` starts both from the DFT seed and from the level `m - 1` optimum plus
/// the next DFT component, and also keeps that optimum padded with a silent
/// component as a candidate, so the training objective is nonincreasing in `m`.
pub fn spectral_fit_predictive_path(training: &[&Trial], m_max: usize, config: &FitConfig) -> Result<Vec<FitResult>> {
    spectral_fit_predictive_path_anchored(training, m_max, T3Anchor::Offset, config)
}

/// As [`spectral_fit_predictive_path`] with an explicit `t3` reference point.
pub fn spectral_fit_predictive_path_anchored(
    training: &[&Trial],
    m_max: usize,
    anchor: T3Anchor,
    config: &FitConfig,
) -> Result<Vec<FitResult>> {
    check_m(m_max)?;
    if training.is_empty() {
        return Err(Error::Argument("empty training set".into()));
    }
    if training.iter().all(|t| t.observed.peak() <= 0.0) {
        return Err(Error::Fit("degenerate trial: no positive brightness".into()));
    }
    let mean = mean_curve(training)?;
    let grid = mean.grid();
    let t3_mean = flatline_time(&mean);
    let (i1, i3) = decay_window(mean.samples(), &grid, DEFAULT_T1, t3_mean)?;
    let window = &mean.samples()[i1..i3];
    let spectrum = dft(window)?;
    let available = window.len() / 2;
    let seed_components = top_m_components(&spectrum, m_max.min(available), grid.dt)?;
    let k2_init = self::mean(window);
    let n = training.len() as f64;
    let (t3_init, t3_range) = match anchor {
        T3Anchor::Offset => {
            let init = training.iter().map(|t| flatline_time(&t.observed) - t.stimulus.duration_s).sum::<f64>() / n;
            (init, (-60.0, 40.0))
        }
        T3Anchor::Onset => {
            let init = training.iter().map(|t| flatline_time(&t.observed)).sum::<f64>() / n;
            let end = training.iter().map(|t| t.observed.end_time()).fold(0.0, f64::max);
            (init, (DEFAULT_T1 + grid.dt, end + grid.dt))
        }
    };

    let objective_of = |p: &SpectralParams| {
        mean_mse(training, |t, grid| spectral_predict(p, &t.stimulus, grid))
    };

    let mut path: Vec<FitResult> = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let m_eff = m.min(seed_components.len());
        let layout = PredictiveLayout { m: m_eff, max_freq: 0.5 / grid.dt, anchor, t3_range };
        let seed = SpectralParams {
            k1: DEFAULT_K1,
            t1: DEFAULT_T1,
            k2: k2_init,
            t3: t3_init,
            components: seed_components[..m_eff].to_vec(),
            t3_anchor: anchor,
        };
        let initial_objective = objective_of(&seed);
        let mut candidates = vec![seed.clone()];
        let mut best = (seed, initial_objective);
        if let Some(prev) = path.last() {
            let ModelParams::Spectral(pp) = &prev.params else { unreachable!() };
            if pp.m() < m_eff {
                let mut warm = pp.clone();
                warm.components.push(seed_components[m_eff - 1]);
                candidates.push(warm);
                let mut padded = pp.clone();
                padded.components.push(SpectrumComponent { amplitude: 0.0, ..seed_components[m_eff - 1] });
                let f = objective_of(&padded);
                if f < best.1 {
                    best = (padded, f);
                }
            } else if prev.objective < best.1 {
                best = (pp.clone(), prev.objective);
            }
        }

        let bounds = layout.bounds();
        let objective = |x: &[f64]| objective_of(&layout.decode(x));
        let mut runs = Vec::new();
        for start in &candidates {
            let chain = minimize_chain(&objective, &layout.encode(start), &bounds, &config.opt)?;
            if chain.f_best < best.1 {
                best = (layout.decode(&chain.x_best), chain.f_best);
            }
            runs.extend(chain.runs);
        }
        path.push(FitResult {
            params: ModelParams::Spectral(best.0),
            objective: best.1,
            initial_objective,
            n_trials: training.len(),
            runs,
        });
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_series_matches_direct_evaluation() {
        let comps = [
            SpectrumComponent::new(0.37, 2.5, 1.1).unwrap(),
            SpectrumComponent::new(1.9, 0.7, -2.0).unwrap(),
            SpectrumComponent::new(0.0, 1.3, 0.4).unwrap(),
        ];
        let fast = eval_series_uniform(&comps, 3.0, 0.125, 0.25, 400);
        for (i, v) in fast.iter().enumerate() {
            let direct = eval_series(&comps, 3.0, 0.125 + i as f64 * 0.25);
            assert!((v - direct).abs() < 1e-12, "sample {i}: {v} vs {direct}");
        }
    }
    use approx::assert_abs_diff_eq;

    fn grid(len: usize) -> Grid {
        Grid::new(0.0, 0.25, len).unwrap()
    }

    fn stim() -> Stimulus {
        Stimulus::new(20.0, 10.0).unwrap()
    }

    #[test]
    fn dft_of_constant() {
        let x = vec![1.5; 12];
        let spec = dft(&x).unwrap();
        assert_abs_diff_eq!(spec[0].re, 18.0, epsilon = 1e-12);
        assert!(spec[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn dft_of_pure_tone() {
        for n in [16usize, 15] {
            let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 3.0 * i as f64 / n as f64).cos()).collect();
            let spec = dft(&x).unwrap();
            for (k, z) in spec.iter().enumerate() {
                if k == 3 || k == n - 3 {
                    assert_abs_diff_eq!(z.norm(), n as f64 / 2.0, epsilon = 1e-9);
                } else {
                    assert!(z.norm() < 1e-9, "bin {k} = {z}");
                }
            }
        }
    }

    #[test]
    fn dft_rejects_short_input() {
        assert!(matches!(dft(&[1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn top_component_of_pure_cosine() {
        let n = 20;
        let x: Vec<f64> = (0..n).map(|i| 2.5 * (2.0 * PI * 3.0 * i as f64 / n as f64).cos()).collect();
        let c = top_m_components(&dft(&x).unwrap(), 1, 0.25).unwrap();
        assert_eq!(c.len(), 1);
        assert_abs_diff_eq!(c[0].freq_hz, 3.0 / (20.0 * 0.25), epsilon = 1e-12);
        assert_abs_diff_eq!(c[0].amplitude, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0].phase, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn top_m_ties_prefer_lower_frequency() {
        let mut spec = vec![Complex64::new(0.0, 0.0); 10];
        spec[2] = Complex64::new(3.0, 0.0);
        spec[4] = Complex64::new(0.0, 3.0);
        spec[8] = spec[2].conj();
        spec[6] = spec[4].conj();
        let c = top_m_components(&spec, 1, 1.0).unwrap();
        assert_abs_diff_eq!(c[0].freq_hz, 0.2);
        let c = top_m_components(&spec, 2, 1.0).unwrap();
        assert_abs_diff_eq!(c[1].freq_hz, 0.4);
    }

    #[test]
    fn top_m_range_checked() {
        let spec = dft(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(top_m_components(&spec, 0, 0.25).is_err());
        assert!(top_m_components(&spec, 3, 0.25).is_err());
        assert!(top_m_components(&spec, 2, 0.25).is_ok());
    }

    #[test]
    fn eval_series_examples() {
        assert_eq!(eval_series(&[], 5.0, 12.3), 5.0);
        let c = SpectrumComponent::new(0.3, 2.0, 0.0).unwrap();
        assert_eq!(eval_series(&[c], 1.0, 0.0), 3.0);
    }

    #[test]
    fn first_local_max_examples() {
        assert_eq!(first_local_max(&[1.0, 3.0, 2.0, 4.0, 1.0], 0), 1);
        assert_eq!(first_local_max(&[5.0, 4.0, 3.0, 2.0], 0), 0);
        assert_eq!(first_local_max(&[0.0, 2.0, 2.0, 1.0], 0), 1);
        assert_eq!(first_local_max(&[1.0, 3.0, 2.0, 4.0, 1.0], 2), 3);
    }

    #[test]
    fn flat_decay_rises_holds_and_extinguishes() {
        let p = SpectralParams::new(10.0, 1.0, 10.0, 20.0, vec![]).unwrap();
        let out = spectral_predict(&p, &stim(), &grid(100)).unwrap();
        let s = out.samples();
        assert_eq!(s[0], 0.0);
        assert_abs_diff_eq!(s[2], 5.0);
        assert_abs_diff_eq!(s[4], 10.0);
        assert!(s[4..80].iter().all(|v| (*v - 10.0).abs() < 1e-12));
        assert!(s[80..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn value_at_t3_is_zero() {
        // Series is large at t3 - t1 = 4 s, but the sample at t3 must still be 0.
        let c = SpectrumComponent::new(0.25, 3.0, 0.0).unwrap();
        let p = SpectralParams::new(10.0, 1.0, 6.0, 5.0, vec![c]).unwrap();
        let out = spectral_predict(&p, &stim(), &grid(40)).unwrap();
        assert!(out.samples()[19] > 0.0);
        assert_eq!(out.samples()[20], 0.0);
    }

    #[test]
    fn t3_not_after_t1_is_a_parameter_error() {
        assert!(matches!(SpectralParams::new(10.0, 1.0, 1.0, 1.0, vec![]), Err(Error::Parameter(_))));
        let mut p = SpectralParams::new(10.0, 1.0, 1.0, 3.0, vec![]).unwrap();
        p.t3 = 0.5;
        assert!(matches!(spectral_predict(&p, &stim(), &grid(40)), Err(Error::Parameter(_))));
    }

    #[test]
    fn offset_anchor_tracks_stimulus_duration() {
        let mut p = SpectralParams::new(10.0, 1.0, 5.0, 2.0, vec![]).unwrap();
        p.t3_anchor = T3Anchor::Offset;
        let g = grid(120);
        let short = spectral_predict(&p, &Stimulus::new(20.0, 1.0).unwrap(), &g).unwrap();
        let long = spectral_predict(&p, &Stimulus::new(20.0, 10.0).unwrap(), &g).unwrap();
        assert_eq!(short.samples()[12], 0.0); // 3 s
        assert!(long.samples()[47] > 0.0); // 11.75 s
        assert_eq!(long.samples()[48], 0.0); // 12 s
    }

    #[test]
    fn connector_joins_rise_and_decay() {
        // Decay series peaks at 2 s after t1 → t2 = 3 s.
        let c = SpectrumComponent::new(0.125, 2.0, -PI / 2.0).unwrap();
        let p = SpectralParams::new(10.0, 1.0, 4.0, 30.0, vec![c]).unwrap();
        let out = spectral_predict(&p, &stim(), &grid(140)).unwrap();
        let s = out.samples();
        let d_t2 = eval_series(&p.components, 4.0, 2.0);
        assert_abs_diff_eq!(s[4], 10.0);
        assert_abs_diff_eq!(s[12], d_t2, epsilon = 1e-12);
        let step = (d_t2 - 10.0) / 8.0;
        for i in 4..12 {
            assert_abs_diff_eq!(s[i + 1] - s[i], step, epsilon = 1e-12);
        }
    }

    #[test]
    fn params_json_shape() {
        let c = SpectrumComponent::new(0.1, 1.0, 0.5).unwrap();
        let p = SpectralParams::new(10.0, 1.0, 2.0, 15.0, vec![c]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, vec!["components", "k1", "k2", "t1", "t3"]);
        assert_eq!(v["components"][0]["freq_hz"], 0.1);
        let back: SpectralParams = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn flatline_examples() {
        let tc = TimeCourse::new(0.0, 0.25, vec![0.0, 10.0, 5.0, 1.0, 0.1, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(flatline_time(&tc), 1.0);
        let bright = TimeCourse::new(0.0, 0.25, vec![0.0, 10.0, 5.0]).unwrap();
        assert_abs_diff_eq!(flatline_time(&bright), 0.75);
    }

    #[test]
    fn mean_curve_excludes_short_trials_from_late_bins() {
        let mk = |s: Vec<f64>| Trial {
            subject_id: 1,
            stimulus: stim(),
            observed: TimeCourse::new(0.0, 0.25, s).unwrap(),
        };
        let a = mk(vec![0.0, 2.0, 4.0, 6.0]);
        let b = mk(vec![0.0, 4.0]);
        let m = mean_curve(&[&a, &b]).unwrap();
        assert_eq!(m.samples(), &[0.0, 3.0, 4.0, 6.0]);
    }

    #[test]
    fn descriptive_fit_rejects_dark_trial() {
        let t = Trial {
            subject_id: 1,
            stimulus: stim(),
            observed: TimeCourse::new(0.0, 0.25, vec![0.0; 40]).unwrap(),
        };
        let err = spectral_fit_descriptive(&t, 2, &FitConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Fit(ref m) if m.contains("degenerate trial")));
    }

    #[test]
    fn predictive_fit_rejects_empty_training() {
        assert!(matches!(spectral_fit_predictive(&[], 2, &FitConfig::default()), Err(Error::Argument(_))));
    }
}
