//! Cross-validation: leave-one-subject-out, leave-one-condition-out and the
//! component-count sweep for the spectral model.
//!
//! Folds are fitted in parallel; reports are assembled in fold-key order, so
//! output does not depend on scheduling.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{Condition, Dataset, Trial};
use crate::error::{Error, Result};
use crate::metrics::{Score, Summary};
use crate::model::{fit_predictive, FitConfig, ModelKind, ModelParams};
use crate::spectral::{spectral_fit_predictive_path, spectral_predict, MAX_COMPONENTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Leave one subject out.
    Subject,
    /// Leave one stimulus condition out.
    Stimulus,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subject" => Ok(Protocol::Subject),
            "stimulus" => Ok(Protocol::Stimulus),
            other => Err(Error::Argument(format!("unknown protocol {other:?} (expected subject or stimulus)"))),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Subject => "subject",
            Protocol::Stimulus => "stimulus",
        })
    }
}

/// What a fold holds out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldKey {
    Subject(u32),
    Condition(Condition),
}

impl fmt::Display for FoldKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoldKey::Subject(s) => write!(f, "subject {s}"),
            FoldKey::Condition(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FoldSpec<'a> {
    pub held_out: FoldKey,
    pub train: Vec<&'a Trial>,
    pub test: Vec<&'a Trial>,
}

/// Partitions `dataset` into one fold per subject or per condition, in key order.
pub fn folds(dataset: &Dataset, protocol: Protocol) -> Result<Vec<FoldSpec<'_>>> {
    let keys: Vec<FoldKey> = match protocol {
        Protocol::Subject => dataset.subjects().into_iter().map(FoldKey::Subject).collect(),
        Protocol::Stimulus => dataset.conditions().into_iter().map(FoldKey::Condition).collect(),
    };
    if keys.len() < 2 {
        let what = match protocol {
            Protocol::Subject => "subjects",
            Protocol::Stimulus => "stimulus conditions",
        };
        return Err(Error::Argument(format!("need at least 2 {what} for cross-validation, found {}", keys.len())));
    }
    let held = |key: &FoldKey, t: &Trial| match key {
        FoldKey::Subject(s) => t.subject_id == *s,
        FoldKey::Condition(c) => t.condition() == *c,
    };
    Ok(keys
        .into_iter()
        .map(|key| {
            let (test, train) = dataset.trials().iter().partition(|t| held(&key, t));
            FoldSpec { held_out: key, train, test }
        })
        .collect())
}

/// SHA-256 over every fold's key and its train/test trial keys.
pub fn partition_digest(folds: &[FoldSpec<'_>]) -> String {
    let mut h = Sha256::new();
    for f in folds {
        h.update(format!("fold {}\n", f.held_out));
        for t in &f.train {
            h.update(format!("train {}\n", t.key()));
        }
        for t in &f.test {
            h.update(format!("test {}\n", t.key()));
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialScore {
    pub subject_id: u32,
    pub condition: Condition,
    pub mse: f64,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRow {
    pub held_out: FoldKey,
    pub n_trials: usize,
    pub mse: Option<Summary>,
    pub r: Option<Summary>,
    /// Held-out trials whose correlation is undefined (constant prediction or observation).
    pub skipped: usize,
    /// Fit or scoring error, if the fold failed.
    pub failed: Option<String>,
    pub params: Option<ModelParams>,
    pub trials: Vec<TrialScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Unweighted mean over fold means.
    pub mse_mean: Option<f64>,
    /// Sample SD over all scored held-out trials.
    pub mse_sd: Option<f64>,
    pub r_mean: Option<f64>,
    pub r_sd: Option<f64>,
    pub n_trials: usize,
    pub skipped: usize,
    pub failed_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub model: ModelKind,
    pub config: FitConfig,
    pub partition_sha256: String,
    pub rows: Vec<FoldRow>,
    pub aggregate: Aggregate,
}

fn score_fold(fold: &FoldSpec<'_>, kind: ModelKind, config: &FitConfig) -> FoldRow {
    let mut row = FoldRow {
        held_out: fold.held_out,
        n_trials: fold.test.len(),
        mse: None,
        r: None,
        skipped: 0,
        failed: None,
        params: None,
        trials: Vec::new(),
    };
    let outcome = fit_predictive(kind, &fold.train, config).and_then(|fit| {
        let mut scores = Vec::with_capacity(fold.test.len());
        for t in &fold.test {
            let pred = fit.params.predict(&t.stimulus, &t.observed.grid())?;
            let s = Score::compute(pred.samples(), t.observed.samples())?;
            scores.push(TrialScore { subject_id: t.subject_id, condition: t.condition(), mse: s.mse, r: s.r });
        }
        Ok((fit.params, scores))
    });
    match outcome {
        Ok((params, scores)) => {
            let mses: Vec<f64> = scores.iter().map(|s| s.mse).collect();
            let rs: Vec<f64> = scores.iter().filter_map(|s| s.r).collect();
            row.mse = Summary::of(&mses);
            row.r = Summary::of(&rs);
            row.skipped = scores.len() - rs.len();
            row.params = Some(params);
            row.trials = scores;
        }
        Err(e) => row.failed = Some(e.to_string()),
    }
    row
}

fn aggregate(rows: &[FoldRow]) -> Aggregate {
    let fold_mse: Vec<f64> = rows.iter().filter_map(|r| r.mse.map(|s| s.mean)).collect();
    let fold_r: Vec<f64> = rows.iter().filter_map(|r| r.r.map(|s| s.mean)).collect();
    let all_mse: Vec<f64> = rows.iter().flat_map(|r| r.trials.iter().map(|t| t.mse)).collect();
    let all_r: Vec<f64> = rows.iter().flat_map(|r| r.trials.iter().filter_map(|t| t.r)).collect();
    Aggregate {
        mse_mean: Summary::of(&fold_mse).map(|s| s.mean),
        mse_sd: Summary::of(&all_mse).map(|s| s.sd),
        r_mean: Summary::of(&fold_r).map(|s| s.mean),
        r_sd: Summary::of(&all_r).map(|s| s.sd),
        n_trials: rows.iter().map(|r| r.n_trials).sum(),
        skipped: rows.iter().map(|r| r.skipped).sum(),
        failed_folds: rows.iter().filter(|r| r.failed.is_some()).count(),
    }
}

/// Fits `kind` on each fold's training trials and scores its held-out trials.
pub fn evaluate(dataset: &Dataset, protocol: Protocol, kind: ModelKind, config: &FitConfig) -> Result<EvalReport> {
    if let ModelKind::Spectral { m } = kind {
        if !(1..=MAX_COMPONENTS).contains(&m) {
            return Err(Error::Argument(format!("m must lie in [1, {MAX_COMPONENTS}], got {m}")));
        }
    }
    let folds = folds(dataset, protocol)?;
    let rows: Vec<FoldRow> = folds.par_iter().map(|f| score_fold(f, kind, config)).collect();
    let aggregate = aggregate(&rows);
    Ok(EvalReport {
        protocol,
        model: kind,
        config: *config,
        partition_sha256: partition_digest(&folds),
        rows,
        aggregate,
    })
}

pub fn loso(dataset: &Dataset, kind: ModelKind, config: &FitConfig) -> Result<EvalReport> {
    evaluate(dataset, Protocol::Subject, kind, config)
}

pub fn loco(dataset: &Dataset, kind: ModelKind, config: &FitConfig) -> Result<EvalReport> {
    evaluate(dataset, Protocol::Stimulus, kind, config)
}

fn fmt_pm(s: Option<Summary>) -> String {
    match s {
        Some(s) => format!("{:.3} ± {:.3}", s.mean, s.sd),
        None => "-".into(),
    }
}

fn fmt_opt_pm(mean: Option<f64>, sd: Option<f64>) -> String {
    match (mean, sd) {
        (Some(m), Some(s)) => format!("{m:.3} ± {s:.3}"),
        (Some(m), None) => format!("{m:.3}"),
        _ => "-".into(),
    }
}

impl EvalReport {
    pub fn succeeded(&self) -> bool {
        self.aggregate.failed_folds == 0
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Aligned text table: one row per fold, then the average.
    pub fn to_table(&self) -> String {
        let mut lines: Vec<[String; 5]> = vec![[
            "held out".into(),
            "n".into(),
            "MSE".into(),
            "r".into(),
            "skipped".into(),
        ]];
        for row in &self.rows {
            let (mse, r) = match &row.failed {
                Some(e) => (format!("failed: {e}"), String::new()),
                None => (fmt_pm(row.mse), fmt_pm(row.r)),
            };
            lines.push([row.held_out.to_string(), row.n_trials.to_string(), mse, r, row.skipped.to_string()]);
        }
        let a = &self.aggregate;
        lines.push([
            "average".into(),
            a.n_trials.to_string(),
            fmt_opt_pm(a.mse_mean, a.mse_sd),
            fmt_opt_pm(a.r_mean, a.r_sd),
            a.skipped.to_string(),
        ]);

        let mut widths = [0usize; 5];
        for l in &lines {
            for (w, c) in widths.iter_mut().zip(l) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = format!("protocol: {}  model: {}\n", self.protocol, self.model);
        for (i, l) in lines.iter().enumerate() {
            let mut line = String::new();
            for (j, (c, w)) in l.iter().zip(widths).enumerate() {
                let pad = w - c.chars().count();
                if j == 0 {
                    let _ = write!(line, "{c}{}", " ".repeat(pad));
                } else {
                    let _ = write!(line, "  {}{c}", " ".repeat(pad));
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
            if i == 0 || i == lines.len() - 2 {
                out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
                out.push('\n');
            }
        }
        out
    }
}

/// One point of a subject's sweep curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub subject_id: u32,
    pub m: usize,
    /// Mean per-trial MSE on the other subjects' trials.
    pub train_mse: f64,
    pub train_se: f64,
    /// Mean per-trial MSE on the held-out subject's trials.
    pub val_mse: f64,
    pub val_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub subject_id: u32,
    pub points: Vec<SweepPoint>,
    pub train_argmin: usize,
    pub val_argmin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub m_min: usize,
    pub m_max: usize,
    pub curves: Vec<SweepCurve>,
    /// Subjects whose fold failed, with the error.
    pub failed: Vec<(u32, String)>,
}

fn argmin(points: &[SweepPoint], f: impl Fn(&SweepPoint) -> f64) -> usize {
    points
        .iter()
        .fold(None::<&SweepPoint>, |best, p| match best {
            Some(b) if f(b) <= f(p) => Some(b),
            _ => Some(p),
        })
        .map_or(0, |p| p.m)
}

fn per_trial_mse(params: &ModelParams, trials: &[&Trial]) -> Result<Summary> {
    let ModelParams::Spectral(p) = params else {
        return Err(Error::Fit("sweep expects spectral parameters".into()));
    };
    let mut mses = Vec::with_capacity(trials.len());
    for t in trials {
        let pred = spectral_predict(p, &t.stimulus, &t.observed.grid())?;
        mses.push(crate::metrics::mse(pred.samples(), t.observed.samples())?);
    }
    Summary::of(&mses).ok_or_else(|| Error::Argument("empty trial set".into()))
}

fn sweep_fold(fold: &FoldSpec<'_>, m_min: usize, m_max: usize, config: &FitConfig) -> Result<SweepCurve> {
    let FoldKey::Subject(subject_id) = fold.held_out else {
        unreachable!("sweep folds are per subject")
    };
    let path = spectral_fit_predictive_path(&fold.train, m_max, config)?;
    let mut points = Vec::new();
    for m in m_min..=m_max {
        let fit = &path[m - 1];
        let train = per_trial_mse(&fit.params, &fold.train)?;
        let val = per_trial_mse(&fit.params, &fold.test)?;
        points.push(SweepPoint {
            subject_id,
            m,
            train_mse: fit.objective,
            train_se: train.sem(),
            val_mse: val.mean,
            val_se: val.sem(),
        });
    }
    Ok(SweepCurve {
        subject_id,
        train_argmin: argmin(&points, |p| p.train_mse),
        val_argmin: argmin(&points, |p| p.val_mse),
        points,
    })
}

/// Training and validation MSE of the predictive spectral fit for each `m` in
/// `m_min..=m_max`, one LOSO fold per subject.
pub fn sweep_m(dataset: &Dataset, m_min: usize, m_max: usize, config: &FitConfig) -> Result<SweepReport> {
    if m_min < 1 || m_max > MAX_COMPONENTS || m_min > m_max {
        return Err(Error::Argument(format!(
            "m range must satisfy 1 <= m_min <= m_max <= {MAX_COMPONENTS}, got [{m_min}, {m_max}]"
        )));
    }
    let folds = folds(dataset, Protocol::Subject)?;
    let results: Vec<Result<SweepCurve>> = folds.par_iter().map(|f| sweep_fold(f, m_min, m_max, config)).collect();
    let mut curves = Vec::new();
    let mut failed = Vec::new();
    for (fold, r) in folds.iter().zip(results) {
        match r {
            Ok(c) => curves.push(c),
            Err(e) => {
                let FoldKey::Subject(s) = fold.held_out else { unreachable!() };
                failed.push((s, e.to_string()));
            }
        }
    }
    Ok(SweepReport { m_min, m_max, curves, failed })
}

impl SweepReport {
    /// One row per subject and `m`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subject_id,m,train_mse,train_se,val_mse,val_se\n");
        for c in &self.curves {
            for p in &c.points {
                let _ = writeln!(
                    out,
                    "{},{},{:.6},{:.6},{:.6},{:.6}",
                    p.subject_id, p.m, p.train_mse, p.train_se, p.val_mse, p.val_se
                );
            }
        }
        out
    }
}
