//! Command-line front end: `fit`, `predict`, `evaluate`, `sweep` and `export-plot`.
//!
//! Exit status is 0 on success, 1 when a fit or computation fails, and 2 for
//! usage or input errors. Output files are written only after all work is done.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::crossval::{self, Protocol, TrialScore};
use crate::data::{self, format_g6, Dataset, Grid, Stimulus, Trial, TrialKey};
use crate::error::Error;
use crate::metrics::Score;
use crate::model::{fit_descriptive, fit_predictive, FitConfig, FitResult, ModelKind, ModelParams};
use crate::optim::OptOptions;

#[derive(Debug, Parser)]
#[command(name = "phosphene", version, about = "Fit and cross-validate phosphene brightness models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to selected trials.
    Fit(FitArgs),
    /// Predict a time course from saved parameters.
    Predict(PredictArgs),
    /// Cross-validate a model (leave one subject or one condition out).
    Evaluate(EvaluateArgs),
    /// Training/validation MSE of the spectral model across component counts.
    #[command(alias = "sweep-m")]
    Sweep(SweepArgs),
    /// Write observed and predicted curves for one trial as CSV and SVG.
    ExportPlot(ExportPlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Spectral,
    Exponential,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMode {
    /// One fit per selected trial.
    Descriptive,
    /// One fit shared by all selected trials.
    Predictive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Subject,
    Stimulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Random seed for multi-start fits.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random restarts for exponential and baseline fits.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub f_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub x_tol: f64,
    /// Iteration cap per optimizer run (default 200 × parameters).
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl OptimizerArgs {
    fn config(&self) -> Result<FitConfig, CliError> {
        for (name, v) in [("--f-tol", self.f_tol), ("--x-tol", self.x_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::usage(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        Ok(FitConfig {
            opt: OptOptions { f_tol: self.f_tol, x_tol: self.x_tol, max_iters: self.max_iters, ..Default::default() },
            restarts: self.restarts,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct Selector {
    #[arg(long)]
    pub subject: Option<u32>,
    /// Pulse rate, pps.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Stimulus duration, seconds.
    #[arg(long)]
    pub dur: Option<f64>,
}

impl Selector {
    fn matches(&self, key: &TrialKey) -> bool {
        self.subject.map_or(true, |s| s == key.subject_id)
            && self.freq.map_or(true, |f| (f - key.condition.freq_pps).abs() < 1e-9)
            && self.dur.map_or(true, |d| (d - key.condition.duration_s).abs() < 1e-9)
    }

    fn select<'a>(&self, dataset: &'a Dataset) -> Result<Vec<&'a Trial>, CliError> {
        let trials: Vec<&Trial> = dataset.trials().iter().filter(|t| self.matches(&t.key())).collect();
        if trials.is_empty() {
            return Err(CliError::usage(format!("no trial matches {}", self.describe())));
        }
        Ok(trials)
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(s) = self.subject {
            parts.push(format!("--subject {s}"));
        }
        if let Some(f) = self.freq {
            parts.push(format!("--freq {}", format_g6(f)));
        }
        if let Some(d) = self.dur {
            parts.push(format!("--dur {}", format_g6(d)));
        }
        if parts.is_empty() {
            "the empty selector".into()
        } else {
            parts.join(" ")
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    /// Spectral components.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
}

impl ModelArgs {
    fn kind(&self) -> Result<ModelKind, CliError> {
        match self.model {
            ModelName::Spectral => {
                if !(1..=crate::spectral::MAX_COMPONENTS).contains(&self.m) {
                    return Err(CliError::usage(format!(
                        "--m must lie in [1, {}], got {}",
                        crate::spectral::MAX_COMPONENTS,
                        self.m
                    )));
                }
                Ok(ModelKind::Spectral { m: self.m })
            }
            ModelName::Exponential => Ok(ModelKind::Exponential),
            ModelName::Baseline => Ok(ModelKind::Baseline),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = FitMode::Descriptive)]
    pub mode: FitMode,
    #[command(flatten)]
    pub select: Selector,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    /// JSON output path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Parameters: a `fit` output file, a fit result, or bare model parameters.
    #[arg(long)]
    pub params: PathBuf,
    /// Picks the record to use when the parameter file holds several.
    #[arg(long)]
    pub subject: Option<u32>,
    #[arg(long)]
    pub freq: f64,
    #[arg(long)]
    pub dur: f64,
    #[arg(long, default_value_t = data::CANONICAL_DT)]
    pub dt: f64,
    /// Last grid time (default: duration + 10 s).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = ProtocolArg::Subject)]
    pub protocol: ProtocolArg,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub m_min: usize,
    #[arg(long, default_value_t = crate::spectral::MAX_COMPONENTS)]
    pub m_max: usize,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportPlotArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Parameter files, one per model curve.
    #[arg(long, required = true)]
    pub params: Vec<PathBuf>,
    /// Expected model of every parameter file.
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    #[command(flatten)]
    pub select: Selector,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// An error with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn failure(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Argument(_) | Error::Format(_) | Error::Data(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

/// Parsed `fit` output: one record per trial (descriptive) or one per training set (predictive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ModelKind,
    pub mode: String,
    pub records: Vec<FitRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub trials: Vec<TrialKey>,
    pub scores: Vec<TrialScore>,
    pub fit: FitResult,
}

/// Files to write once a command has finished computing.
struct Outputs {
    files: Vec<(PathBuf, String)>,
    stdout: String,
    stderr: String,
    code: i32,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new(), stdout: String::new(), stderr: String::new(), code: 0 }
    }

    fn emit(&mut self, out: &Option<PathBuf>, contents: String) {
        match out {
            Some(p) => self.files.push((p.clone(), contents)),
            None => self.stdout.push_str(&contents),
        }
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command).and_then(flush) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn flush(out: Outputs) -> Result<i32, CliError> {
    for (path, contents) in &out.files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::failure(format!("{}: {e}", dir.display())))?;
        }
        fs::write(path, contents).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))?;
    }
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    Ok(out.code)
}

fn execute(command: &Command) -> Result<Outputs, CliError> {
    match command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::ExportPlot(a) => cmd_export_plot(a),
    }
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(CliError::usage(format!("{what} {} does not exist", path.display())));
    }
    Ok(())
}

fn load(path: &Path) -> Result<Dataset, CliError> {
    require_file(path, "dataset")?;
    Ok(data::load_dataset(path)?)
}

fn score_trials(params: &ModelParams, trials: &[&Trial]) -> Result<Vec<TrialScore>, Error> {
    trials
        .iter()
        .map(|t| {
            let pred = params.predict(&t.stimulus, &t.observed.grid())?;
            let s = Score::compute(pred.samples(), t.observed.samples())?;
            Ok(TrialScore { subject_id: t.subject_id, condition: t.condition(), mse: s.mse, r: s.r })
        })
        .collect()
}

fn score_line(s: &TrialScore) -> String {
    let r = s.r.map_or("undefined".to_string(), |r| format!("{r:.4}"));
    format!("subject {} @ {}  mse={:.4}  r={r}\n", s.subject_id, s.condition, s.mse)
}

fn cmd_fit(args: &FitArgs) -> Result<Outputs, CliError> {
    let kind = args.model.kind()?;
    let config = args.opt.config()?;
    let dataset = load(&args.dataset)?;
    let trials = args.select.select(&dataset)?;

    let groups: Vec<Vec<&Trial>> = match args.mode {
        FitMode::Descriptive => trials.iter().map(|t| vec![*t]).collect(),
        FitMode::Predictive => vec![trials.clone()],
    };
    let mut out = Outputs::new();
    let mut records = Vec::new();
    for group in groups {
        let fit = match args.mode {
            FitMode::Descriptive => fit_descriptive(kind, group[0], &config),
            FitMode::Predictive => fit_predictive(kind, &group, &config),
        };
        let fit = match fit {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(out.stderr, "fit failed for {}: {e}", group[0].key());
                out.code = 1;
                continue;
            }
        };
        let scores = score_trials(&fit.params, &group)?;
        for s in &scores {
            out.stderr.push_str(&score_line(s));
        }
        records.push(FitRecord { trials: group.iter().map(|t| t.key()).collect(), scores, fit });
    }
    let mode = match args.mode {
        FitMode::Descriptive => "descriptive",
        FitMode::Predictive => "predictive",
    };
    let report = FitReport { model: kind, mode: mode.into(), records };
    let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    json.push('\n');
    if args.out.is_some() {
        // Score lines are the primary console output when the JSON goes to a file.
        out.stdout = std::mem::take(&mut out.stderr);
    }
    out.emit(&args.out, json);
    Ok(out)
}

/// Reads bare parameters, a fit result, a fit record, or a `fit` report.
/// A report with several records needs `subject`/`condition` to pick one.
pub fn load_params(path: &Path, select: &Selector) -> Result<ModelParams, CliError> {
    require_file(path, "parameter file")?;
    let text = fs::read_to_string(path).map_err(Error::from)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::usage(format!("{}: {e}", path.display()));
    if value.get("records").is_some() {
        let report: FitReport = serde_json::from_value(value).map_err(bad)?;
        let matching: Vec<&FitRecord> = if report.records.len() == 1 {
            report.records.iter().collect()
        } else {
            report.records.iter().filter(|r| r.trials.iter().any(|k| select.matches(k))).collect()
        };
        return match matching.as_slice() {
            [one] => Ok(one.fit.params.clone()),
            [] => Err(CliError::usage(format!("no record in {} matches {}", path.display(), select.describe()))),
            _ => Err(CliError::usage(format!(
                "{} holds {} matching records; narrow with --subject/--freq/--dur",
                path.display(),
                matching.len()
            ))),
        };
    }
    if value.get("fit").is_some() {
        let record: FitRecord = serde_json::from_value(value).map_err(bad)?;
        return Ok(record.fit.params);
    }
    if value.get("params").is_some() {
        let fit: FitResult = serde_json::from_value(value).map_err(bad)?;
        return Ok(fit.params);
    }
    serde_json::from_value(value).map_err(bad)
}

fn curve_csv(grid: &Grid, samples: &[f64]) -> String {
    let mut s = String::from("time_s,brightness\n");
    for (i, v) in samples.iter().enumerate() {
        let _ = writeln!(s, "{},{}", format_g6(grid.time(i)), format_g6(*v));
    }
    s
}

fn cmd_predict(args: &PredictArgs) -> Result<Outputs, CliError> {
    let select = Selector { subject: args.subject, freq: Some(args.freq), dur: Some(args.dur) };
    let params = load_params(&args.params, &select)?;
    let stimulus = Stimulus::new(args.freq, args.dur)?;
    let t_end = args.t_end.unwrap_or(args.dur + data::TRAILING_WINDOW_S);
    let grid = Grid::spanning(0.0, args.dt, t_end)?;
    let pred = params.predict(&stimulus, &grid)?;
    let mut out = Outputs::new();
    out.emit(&args.out, curve_csv(&grid, pred.samples()));
    Ok(out)
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<Outputs, CliError> {
    let kind = args.model.kind()?;
    let config = args.opt.config()?;
    let dataset = load(&args.dataset)?;
    let protocol = match args.protocol {
        ProtocolArg::Subject => Protocol::Subject,
        ProtocolArg::Stimulus => Protocol::Stimulus,
    };
    let report = crossval::evaluate(&dataset, protocol, kind, &config)?;
    let mut out = Outputs::new();
    if !report.succeeded() {
        out.code = 1;
        for row in &report.rows {
            if let Some(e) = &row.failed {
                let _ = writeln!(out.stderr, "fold {} failed: {e}", row.held_out);
            }
        }
    }
    let text = match args.format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Table => report.to_table(),
    };
    out.emit(&args.out, text);
    Ok(out)
}

fn cmd_sweep(args: &SweepArgs) -> Result<Outputs, CliError> {
    let config = args.opt.config()?;
    if args.m_min < 1 || args.m_max > crate::spectral::MAX_COMPONENTS || args.m_min > args.m_max {
        return Err(CliError::usage(format!(
            "need 1 <= --m-min <= --m-max <= {}, got {}..{}",
            crate::spectral::MAX_COMPONENTS,
            args.m_min,
            args.m_max
        )));
    }
    let dataset = load(&args.dataset)?;
    let report = crossval::sweep_m(&dataset, args.m_min, args.m_max, &config)?;
    let mut out = Outputs::new();
    for c in &report.curves {
        let _ = writeln!(out.stderr, "subject {}: train argmin m={}, validation argmin m={}", c.subject_id, c.train_argmin, c.val_argmin);
    }
    for (s, e) in &report.failed {
        let _ = writeln!(out.stderr, "subject {s} failed: {e}");
        out.code = 1;
    }
    out.emit(&args.out, report.to_csv());
    Ok(out)
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 40.0;

fn color(model: &str) -> &'static str {
    match model {
        "observed" => "#999999",
        "spectral" => "#000000",
        "exponential" => "#1f5fbf",
        "baseline" => "#e07b00",
        _ => "#7f3fbf",
    }
}

/// Minimal overlay: axes, a gray stimulus bar and one polyline per curve.
pub fn render_svg(duration_s: f64, t_max: f64, curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let y_max = curves
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.1))
        .fold(1.0, f64::max)
        * 1.05;
    let x = |t: f64| MARGIN + (SVG_W - 2.0 * MARGIN) * t / t_max;
    let y = |v: f64| SVG_H - MARGIN - (SVG_H - 2.0 * MARGIN) * v.max(0.0) / y_max;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{SVG_W}" height="{SVG_H}" fill="white"/>"#);
    let (x0, y0) = (MARGIN, SVG_H - MARGIN);
    let _ = writeln!(s, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{:.2}" y2="{y0}" stroke="black"/>"#, SVG_W - MARGIN);
    let _ = writeln!(s, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN}" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r##"<rect class="stimulus" x="{:.2}" y="{:.2}" width="{:.2}" height="6" fill="#bbbbbb"/>"##,
        x(0.0),
        y0 + 8.0,
        x(duration_s.min(t_max)) - x(0.0)
    );
    for (name, pts) in curves {
        let points: Vec<String> = pts.iter().map(|(t, v)| format!("{:.2},{:.2}", x(*t), y(*v))).collect();
        let _ = writeln!(
            s,
            r#"<polyline data-curve="{name}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            color(name),
            points.join(" ")
        );
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12">time (s)</text>"#, SVG_W / 2.0, SVG_H - 8.0);
    s.push_str("</svg>\n");
    s
}

fn cmd_export_plot(args: &ExportPlotArgs) -> Result<Outputs, CliError> {
    let dataset = load(&args.dataset)?;
    let trials = args.select.select(&dataset)?;
    let [trial] = trials.as_slice() else {
        return Err(CliError::usage(format!(
            "{} selects {} trials; export-plot needs exactly one",
            args.select.describe(),
            trials.len()
        )));
    };
    let mut models = Vec::new();
    for p in &args.params {
        let params = load_params(p, &args.select)?;
        if let Some(expected) = args.model {
            let want = match expected {
                ModelName::Spectral => "spectral",
                ModelName::Exponential => "exponential",
                ModelName::Baseline => "baseline",
            };
            if params.name() != want {
                return Err(CliError::failure(format!(
                    "{} holds {} parameters, expected {want}",
                    p.display(),
                    params.name()
                )));
            }
        }
        models.push(params);
    }

    let grid = trial.observed.grid();
    let mut out = Outputs::new();
    let mut observed_rows = data::CSV_HEADER.join(",");
    observed_rows.push('\n');
    let mut buf = Vec::new();
    data::write_trial_rows(trial, &mut buf)?;
    observed_rows.push_str(&String::from_utf8(buf).expect("CSV rows are UTF-8"));
    out.files.push((args.out.join("observed.csv"), observed_rows));

    let mut curves = vec![(
        "observed".to_string(),
        grid.times().zip(trial.observed.samples().iter().copied()).collect::<Vec<_>>(),
    )];
    let mut used: Vec<String> = Vec::new();
    for params in &models {
        let pred = params.predict(&trial.stimulus, &grid)?;
        let base = params.name().to_string();
        let n = used.iter().filter(|u| **u == base).count();
        let file = if n == 0 { format!("{base}.csv") } else { format!("{base}-{}.csv", n + 1) };
        used.push(base.clone());
        out.files.push((args.out.join(file), curve_csv(&grid, pred.samples())));
        curves.push((base, grid.times().zip(pred.samples().iter().copied()).collect()));
    }
    let svg = render_svg(trial.stimulus.duration_s, grid.end_time().max(grid.dt), &curves);
    out.files.push((args.out.join("plot.svg"), svg));
    let _ = writeln!(out.stdout, "wrote {} files to {}", out.files.len(), args.out.display());
    Ok(out)
}
