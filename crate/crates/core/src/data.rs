//! Time-course containers, the trial CSV format, and resampling.
//!
//! Every trial is stored on a uniform grid whose origin is stimulus onset.
//! The CSV format has one row per sample:
//!
//! ```text
//! subject_id,freq_pps,duration_s,time_s,brightness
//! ```

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample spacing of the canonical dataset, in seconds.
pub const CANONICAL_DT: f64 = 0.25;

/// Seconds of post-offset signal every trial grid must cover.
pub const TRAILING_WINDOW_S: f64 = 10.0;

pub const CSV_HEADER: [&str; 5] = ["subject_id", "freq_pps", "duration_s", "time_s", "brightness"];

pub(crate) const TIME_EPS: f64 = 1e-9;

/// A uniform sampling grid: `len` points at `t0 + i * dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(t0: f64, dt: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Argument(format!("grid spacing must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::Argument("grid origin must be finite".into()));
        }
        if len == 0 {
            return Err(Error::Argument("grid must contain at least one sample".into()));
        }
        Ok(Self { t0, dt, len })
    }

    /// Grid starting at `t0` whose last point is the last multiple of `dt` not past `t_end`.
    pub fn spanning(t0: f64, dt: f64, t_end: f64) -> Result<Self> {
        if t_end < t0 {
            return Err(Error::Argument("grid end precedes its origin".into()));
        }
        let len = ((t_end - t0) / dt + TIME_EPS).floor() as usize + 1;
        Self::new(t0, dt, len)
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.time(i))
    }

    /// Index of the grid point nearest to `t`, ties resolved toward the earlier index.
    /// Not clamped: may be negative or `>= len`.
    pub fn nearest_index(&self, t: f64) -> i64 {
        let pos = (t - self.t0) / self.dt;
        let below = pos.floor();
        if pos - below > 0.5 + TIME_EPS {
            below as i64 + 1
        } else {
            below as i64
        }
    }

    /// First index whose time is at or after `t` (within [`TIME_EPS`]), clamped to `len`.
    pub fn first_index_at_or_after(&self, t: f64) -> usize {
        let pos = ((t - self.t0) / self.dt - TIME_EPS).ceil();
        if pos <= 0.0 {
            0
        } else {
            (pos as usize).min(self.len)
        }
    }
}

/// A uniformly sampled brightness trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeCourse {
    t0: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl TimeCourse {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        Grid::new(t0, dt, samples.len().max(1))?;
        if samples.is_empty() {
            return Err(Error::Data("time course has no samples".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite brightness at sample {i}")));
        }
        Ok(Self { t0, dt, samples })
    }

    /// Builds a time course on `grid` without re-checking the samples.
    pub(crate) fn from_grid(grid: Grid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len, samples.len());
        Self { t0: grid.t0, dt: grid.dt, samples }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; a time course holds at least one sample.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn grid(&self) -> Grid {
        Grid { t0: self.t0, dt: self.dt, len: self.samples.len() }
    }

    pub fn time(&self, i: usize) -> f64 {
        self.grid().time(i)
    }

    pub fn end_time(&self) -> f64 {
        self.grid().end_time()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Linear interpolation of `tc` onto a grid of spacing `dt_out` over the same interval.
pub fn resample(tc: &TimeCourse, dt_out: f64) -> Result<TimeCourse> {
    if !(dt_out > 0.0 && dt_out.is_finite()) {
        return Err(Error::Argument(format!("resampling step must be positive, got {dt_out}")));
    }
    let grid = Grid::spanning(tc.t0, dt_out, tc.end_time())?;
    let last = tc.samples.len() - 1;
    let samples = (0..grid.len)
        .map(|j| {
            let pos = j as f64 * dt_out / tc.dt;
            let nearest = pos.round();
            if (pos - nearest).abs() < TIME_EPS {
                return tc.samples[(nearest as usize).min(last)];
            }
            let i = (pos.floor() as usize).min(last);
            if i == last {
                return tc.samples[last];
            }
            let frac = pos - i as f64;
            tc.samples[i] + frac * (tc.samples[i + 1] - tc.samples[i])
        })
        .collect();
    Ok(TimeCourse::from_grid(grid, samples))
}

/// A stimulus condition key: pulse rate and train duration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Condition {
    pub freq_pps: f64,
    pub duration_s: f64,
}

impl Condition {
    pub fn new(freq_pps: f64, duration_s: f64) -> Self {
        Self { freq_pps, duration_s }
    }
}

impl PartialEq for Condition {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Condition {}

impl PartialOrd for Condition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Condition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.freq_pps
            .total_cmp(&other.freq_pps)
            .then(self.duration_s.total_cmp(&other.duration_s))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} pps / {} s", format_g6(self.freq_pps), format_g6(self.duration_s))
    }
}

/// Pulse-train descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub freq_pps: f64,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_label: Option<String>,
}

impl Stimulus {
    pub fn new(freq_pps: f64, duration_s: f64) -> Result<Self> {
        if !(freq_pps > 0.0 && freq_pps.is_finite()) {
            return Err(Error::Argument(format!("stimulus frequency must be positive, got {freq_pps}")));
        }
        if !(duration_s > 0.0 && duration_s.is_finite()) {
            return Err(Error::Argument(format!("stimulus duration must be positive, got {duration_s}")));
        }
        Ok(Self { freq_pps, duration_s, amplitude_label: None })
    }

    pub fn condition(&self) -> Condition {
        Condition::new(self.freq_pps, self.duration_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub subject_id: u32,
    pub stimulus: Stimulus,
    pub observed: TimeCourse,
}

impl Trial {
    pub fn condition(&self) -> Condition {
        self.stimulus.condition()
    }

    pub fn key(&self) -> TrialKey {
        TrialKey { subject_id: self.subject_id, condition: self.condition() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrialKey {
    pub subject_id: u32,
    pub condition: Condition,
}

impl fmt::Display for TrialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "subject {} @ {}", self.subject_id, self.condition)
    }
}

/// An immutable set of trials sharing one sample spacing, ordered by (subject, condition).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    trials: Vec<Trial>,
}

impl Dataset {
    pub fn new(mut trials: Vec<Trial>) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::Data("no trials".into()));
        }
        trials.sort_by_key(Trial::key);
        for pair in trials.windows(2) {
            if pair[0].key() == pair[1].key() {
                return Err(Error::Data(format!("duplicate trial for {}", pair[0].key())));
            }
        }
        let dt = trials[0].observed.dt();
        if let Some(t) = trials.iter().find(|t| (t.observed.dt() - dt).abs() > TIME_EPS) {
            return Err(Error::Data(format!(
                "trial {} has spacing {} but the dataset uses {}",
                t.key(),
                t.observed.dt(),
                dt
            )));
        }
        Ok(Self { trials })
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.trials[0].observed.dt()
    }

    pub fn subjects(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.trials.iter().map(|t| t.subject_id).collect();
        s.dedup();
        s
    }

    pub fn conditions(&self) -> Vec<Condition> {
        let mut c: Vec<Condition> = self.trials.iter().map(Trial::condition).collect();
        c.sort();
        c.dedup();
        c
    }

    pub fn by_subject(&self, subject_id: u32) -> Vec<&Trial> {
        self.trials.iter().filter(|t| t.subject_id == subject_id).collect()
    }

    pub fn by_condition(&self, condition: Condition) -> Vec<&Trial> {
        self.trials.iter().filter(|t| t.condition() == condition).collect()
    }

    pub fn get(&self, subject_id: u32, condition: Condition) -> Option<&Trial> {
        let key = TrialKey { subject_id, condition };
        self.trials.binary_search_by(|t| t.key().cmp(&key)).ok().map(|i| &self.trials[i])
    }
}

/// Reads a dataset CSV from disk.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    read_dataset(BufReader::new(file))
}

/// Parses the dataset CSV format from any reader.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    let columns = column_positions(&headers)?;

    let mut groups: BTreeMap<TrialKey, Vec<(f64, f64)>> = BTreeMap::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        let row = line + 2;
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Format(format!("row {row}: expected 5 fields, found {}", record.len())));
        }
        let field = |c: usize| &record[columns[c]];
        let subject_id: u32 = field(0)
            .parse()
            .map_err(|_| Error::Format(format!("row {row}: bad subject_id {:?}", field(0))))?;
        let num = |c: usize| -> Result<f64> {
            field(c)
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("row {row}: bad {} {:?}", CSV_HEADER[c], field(c))))
        };
        let freq = num(1)?;
        let dur = num(2)?;
        let time = num(3)?;
        let brightness = num(4)?;
        if !time.is_finite() {
            return Err(Error::Data(format!("row {row}: non-finite time")));
        }
        if !brightness.is_finite() {
            return Err(Error::Data(format!("row {row}: non-finite brightness")));
        }
        let stimulus = Stimulus::new(freq, dur).map_err(|e| Error::Data(format!("row {row}: {e}")))?;
        let key = TrialKey { subject_id, condition: stimulus.condition() };
        groups.entry(key).or_default().push((time, brightness));
    }
    if groups.is_empty() {
        return Err(Error::Data("no trials".into()));
    }

    let mut built = Vec::with_capacity(groups.len());
    for (key, mut rows) in groups {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[1].0 - w[0].0 < TIME_EPS) {
            return Err(Error::Data(format!("duplicate sample at t={} for {key}", w[0].0)));
        }
        if rows[0].0 > TIME_EPS {
            return Err(Error::Data(format!("{key} starts at t={} after stimulus onset", rows[0].0)));
        }
        built.push((key, rows));
    }

    // All trials share the finest spacing present in the file.
    let dt = built
        .iter()
        .flat_map(|(_, rows)| rows.windows(2).map(|w| w[1].0 - w[0].0))
        .fold(f64::INFINITY, f64::min);
    let dt = if dt.is_finite() { snap_step(dt) } else { CANONICAL_DT };

    let trials = built
        .into_iter()
        .map(|(key, rows)| {
            let observed = uniform_from_rows(&rows, dt)?;
            let observed = extend_trailing_window(&observed, key.condition.duration_s);
            let stimulus = Stimulus::new(key.condition.freq_pps, key.condition.duration_s)?;
            Ok(Trial { subject_id: key.subject_id, stimulus, observed })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(trials)
}

fn column_positions(headers: &csv::StringRecord) -> Result<[usize; 5]> {
    let names: Vec<&str> = headers.iter().collect();
    let missing: Vec<&str> = CSV_HEADER.iter().copied().filter(|c| !names.contains(c)).collect();
    let extra: Vec<&str> = names.iter().copied().filter(|c| !CSV_HEADER.contains(c)).collect();
    if !missing.is_empty() || !extra.is_empty() || names.len() != CSV_HEADER.len() {
        return Err(Error::Format(format!(
            "expected columns {}; missing {missing:?}, unexpected {extra:?}",
            CSV_HEADER.join(",")
        )));
    }
    let mut pos = [0; 5];
    for (slot, name) in pos.iter_mut().zip(CSV_HEADER) {
        *slot = names.iter().position(|n| *n == name).expect("checked above");
    }
    Ok(pos)
}

/// Rounds a parsed spacing to 9 decimals so that 0.25 read back from "0.25" stays exact.
fn snap_step(dt: f64) -> f64 {
    let snapped = (dt * 1e9).round() / 1e9;
    if snapped > 0.0 {
        snapped
    } else {
        dt
    }
}

fn uniform_from_rows(rows: &[(f64, f64)], dt: f64) -> Result<TimeCourse> {
    let t0 = rows[0].0;
    let t_end = rows[rows.len() - 1].0;
    let grid = Grid::spanning(t0, dt, t_end)?;
    let mut samples = Vec::with_capacity(grid.len);
    let mut k = 0;
    for t in grid.times() {
        while k + 1 < rows.len() && rows[k + 1].0 <= t + TIME_EPS {
            k += 1;
        }
        let (ta, va) = rows[k];
        if (t - ta).abs() < TIME_EPS || k + 1 == rows.len() {
            samples.push(va);
        } else {
            let (tb, vb) = rows[k + 1];
            samples.push(va + (t - ta) / (tb - ta) * (vb - va));
        }
    }
    TimeCourse::new(t0, dt, samples)
}

/// Pads a trial with zeros up to `duration + TRAILING_WINDOW_S` when the curve has
/// already returned to zero (last sample at most 2% of peak). Otherwise unchanged.
pub fn extend_trailing_window(tc: &TimeCourse, duration_s: f64) -> TimeCourse {
    let required_end = duration_s + TRAILING_WINDOW_S;
    let last = *tc.samples.last().expect("non-empty");
    let peak = tc.peak().max(0.0);
    if tc.end_time() + TIME_EPS >= required_end || last > 0.02 * peak {
        return tc.clone();
    }
    let mut samples = tc.samples.clone();
    let mut n = samples.len();
    while tc.t0 + (n - 1) as f64 * tc.dt + TIME_EPS < required_end {
        samples.push(0.0);
        n += 1;
    }
    TimeCourse { t0: tc.t0, dt: tc.dt, samples }
}

/// Writes the dataset in the CSV format, trials in key order, times ascending.
pub fn write_dataset<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    for trial in dataset.trials() {
        write_trial_rows(trial, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one trial's rows (no header) in the dataset CSV format.
pub fn write_trial_rows<W: Write>(trial: &Trial, w: &mut W) -> Result<()> {
    let freq = format_g6(trial.stimulus.freq_pps);
    let dur = format_g6(trial.stimulus.duration_s);
    for (i, v) in trial.observed.samples().iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            trial.subject_id,
            freq,
            dur,
            format_g6(trial.observed.time(i)),
            format_g6(*v)
        )?;
    }
    Ok(())
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_dataset(dataset, file)
}

/// Formats `x` with 6 significant digits, like C's `%.6g`. Negative zero prints as `0`.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp) as usize;
    strip_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tc(dt: f64, samples: &[f64]) -> TimeCourse {
        TimeCourse::new(0.0, dt, samples.to_vec()).unwrap()
    }

    #[test]
    fn resample_midpoints() {
        let out = resample(&tc(1.0, &[0.0, 1.0, 2.0]), 0.5).unwrap();
        assert_eq!(out.samples(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn resample_quarter_steps() {
        // Hand-interpolated: 0 + k * (4 - 0) / 4 for k = 0..=4.
        let out = resample(&tc(1.0, &[0.0, 4.0]), 0.25).unwrap();
        assert_eq!(out.samples(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(out.dt(), 0.25);
    }

    #[test]
    fn resample_to_own_step_is_identity() {
        let original = tc(0.25, &[0.3, 9.1, 7.7, 2.0, 0.0]);
        assert_eq!(resample(&original, 0.25).unwrap(), original);
    }

    #[test]
    fn resample_rejects_nonpositive_step() {
        let original = tc(0.25, &[1.0, 2.0]);
        assert!(matches!(resample(&original, 0.0), Err(Error::Argument(_))));
        assert!(matches!(resample(&original, -0.5), Err(Error::Argument(_))));
    }

    #[test]
    fn time_course_rejects_bad_input() {
        assert!(TimeCourse::new(0.0, 0.25, vec![]).is_err());
        assert!(TimeCourse::new(0.0, 0.0, vec![1.0]).is_err());
        assert!(TimeCourse::new(0.0, 0.25, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn g6_formatting_matches_printf() {
        assert_eq!(format_g6(0.25), "0.25");
        assert_eq!(format_g6(10.0), "10");
        assert_eq!(format_g6(4.791576), "4.79158");
        assert_eq!(format_g6(-0.0339), "-0.0339");
        assert_eq!(format_g6(1.0e-5), "1e-05");
        assert_eq!(format_g6(123456789.0), "1.23457e+08");
        assert_eq!(format_g6(-0.0), "0");
        assert_eq!(format_g6(69.5), "69.5");
    }

    #[test]
    fn nearest_index_ties_go_early() {
        let g = Grid::new(0.0, 0.25, 10).unwrap();
        assert_eq!(g.nearest_index(0.125), 0);
        assert_eq!(g.nearest_index(0.13), 1);
        assert_eq!(g.nearest_index(1.0), 4);
        assert_eq!(g.first_index_at_or_after(1.0), 4);
        assert_eq!(g.first_index_at_or_after(1.01), 5);
        assert_eq!(g.first_index_at_or_after(-3.0), 0);
    }

    #[test]
    fn trailing_window_pads_only_returned_curves() {
        let back_to_zero = tc(0.25, &[0.0, 10.0, 5.0, 0.0]);
        let padded = extend_trailing_window(&back_to_zero, 0.5);
        assert_abs_diff_eq!(padded.end_time(), 10.5, epsilon = 1e-12);
        assert!(padded.samples()[4..].iter().all(|v| *v == 0.0));

        let still_bright = tc(0.25, &[0.0, 10.0, 5.0, 4.0]);
        assert_eq!(extend_trailing_window(&still_bright, 0.5), still_bright);
    }

    const SMALL: &str = "subject_id,freq_pps,duration_s,time_s,brightness\n\
        1,20,10,0.5,1\n2,5,10,0,0\n1,20,10,0,0\n1,20,10,0.25,2\n2,5,10,0.25,3\n";

    #[test]
    fn groups_and_sorts_rows() {
        let ds = read_dataset(SMALL.as_bytes()).unwrap();
        assert_eq!(ds.subjects(), vec![1, 2]);
        let t = ds.get(1, Condition::new(20.0, 10.0)).unwrap();
        assert_eq!(&t.observed.samples()[..3], &[0.0, 2.0, 1.0]);
        assert_eq!(ds.dt(), 0.25);
        assert_eq!(ds.by_condition(Condition::new(5.0, 10.0)).len(), 1);
    }

    #[test]
    fn header_only_file_has_no_trials() {
        let err = read_dataset("subject_id,freq_pps,duration_s,time_s,brightness\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m == "no trials"), "{err}");
    }

    #[test]
    fn duplicate_rows_rejected() {
        let csv = "subject_id,freq_pps,duration_s,time_s,brightness\n1,20,10,0,0\n1,20,10,0,1\n";
        let err = read_dataset(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("duplicate sample")), "{err}");
    }

    #[test]
    fn column_mismatch_is_a_format_error() {
        let missing = "subject_id,freq_pps,time_s,brightness\n1,20,0,0\n";
        assert!(matches!(read_dataset(missing.as_bytes()), Err(Error::Format(_))));
        let extra = "subject_id,freq_pps,duration_s,time_s,brightness,x\n1,20,10,0,0,1\n";
        assert!(matches!(read_dataset(extra.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn non_finite_brightness_is_a_data_error() {
        let csv = "subject_id,freq_pps,duration_s,time_s,brightness\n1,20,10,0,NaN\n";
        assert!(matches!(read_dataset(csv.as_bytes()), Err(Error::Data(_))));
    }

    #[test]
    fn columns_may_be_reordered() {
        let csv = "time_s,brightness,subject_id,freq_pps,duration_s\n0,0,3,60,10\n0.25,4,3,60,10\n";
        let ds = read_dataset(csv.as_bytes()).unwrap();
        assert_eq!(ds.trials()[0].subject_id, 3);
        assert_eq!(ds.trials()[0].observed.samples()[1], 4.0);
    }

    #[test]
    fn late_start_rejected() {
        let csv = "subject_id,freq_pps,duration_s,time_s,brightness\n1,20,10,0.5,0\n1,20,10,0.75,1\n";
        assert!(matches!(read_dataset(csv.as_bytes()), Err(Error::Data(_))));
    }
}
