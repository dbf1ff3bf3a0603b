//! `seqbell` command line: sweep, trials, calibrate, verify.
//!
//! Every command writes one table, as CSV with a header row or as JSON lines
//! with the same keys in the same order. Angles are radians unless
//! `--degrees` is given; output angles are always radians.

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calibration::{fit_scan, read_scan, stability_of_fits, FitResult};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate_both, run_trials, simulate_counts, summarize, trial_seed, AcquisitionPlan};
use crate::sequential_chsh::{
    chsh_pair, closed_form_i1, closed_form_i2, WeakConfig, CLASSICAL_BOUND, TSIRELSON_BOUND,
};
use crate::verify::{all_passed, verify_report, Fault};

/// Visibility that approximately reproduces the measured CHSH pairs.
pub const EMULATION_VISIBILITY: f64 = 0.985;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::OutOfRange { .. } => EXIT_USAGE,
        Error::Io { .. } | Error::Parse { .. } | Error::InvalidScan(_) | Error::TooFewPoints { .. } => EXIT_IO,
        Error::NonConvergence(_) | Error::RankDeficient(_) => EXIT_CONVERGENCE,
        _ => EXIT_FAILURE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "seqbell", version, about = "Sequential CHSH simulator with weak measurement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate both CHSH values over a grid of measurement strengths.
    Sweep(SweepArgs),
    /// Run repeated finite-statistics Bell measurements.
    Trials(TrialsArgs),
    /// Fit angle-scan files and report ε.
    Calibrate(CalibrateArgs),
    /// Run the invariant and oracle self-test suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Directory for relative output paths.
    #[arg(long, env = "SEQBELL_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Seconds per configuration.
    #[arg(long, default_value_t = 30.0)]
    pub duration: f64,
    /// Mean coincidences per second.
    #[arg(long, default_value_t = 700.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Grid as `start:stop:count` or a comma list; `pi` is accepted.
    #[arg(long, conflicts_with = "epsilon")]
    pub epsilon_grid: Option<String>,
    /// Single strength, repeatable.
    #[arg(long)]
    pub epsilon: Vec<String>,
    #[arg(long, default_value = "0")]
    pub phi0: String,
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Interpret ε and φ₀ in degrees.
    #[arg(long)]
    pub degrees: bool,
    /// Add one simulated acquisition per grid point.
    #[arg(long)]
    pub monte_carlo: bool,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrialsArgs {
    #[arg(long)]
    pub epsilon: String,
    #[arg(long, default_value = "0")]
    pub phi0: String,
    /// Source visibility; `--emulation-preset` sets 0.985.
    #[arg(long, conflicts_with = "emulation_preset")]
    pub visibility: Option<f64>,
    #[arg(long)]
    pub emulation_preset: bool,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Scan file, repeatable.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Append mean and RMS of ε over all inputs.
    #[arg(long)]
    pub stability: bool,
    /// Write per-point fit residuals to this file.
    #[arg(long)]
    pub residuals: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InjectFault {
    R1Normalization,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<InjectFault>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Parses `3.1`, `pi`, `pi/3`, `2pi/3` or `2*pi/3`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Usage(format!("cannot parse angle {text:?}"));
    if let Some(pos) = t.find("pi") {
        let (pre, post) = (&t[..pos], &t[pos + 2..]);
        let pre = pre.strip_suffix('*').unwrap_or(pre);
        let k = match pre {
            "" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().map_err(|_| bad())?,
        };
        let d = match post {
            "" => 1.0,
            p => p.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        Ok(k * std::f64::consts::PI / d)
    } else {
        t.parse::<f64>().map_err(|_| bad())
    }
}

/// Parses `start:stop:count` or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Usage("empty ε grid".into()));
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(parse_angle).collect(),
        3 => {
            let (a, b) = (parse_angle(parts[0])?, parse_angle(parts[1])?);
            let n: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad grid count {:?}", parts[2])))?;
            match n {
                0 => Err(Error::Usage("empty ε grid".into())),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
            }
        }
        _ => Err(Error::Usage(format!("cannot parse grid {text:?}"))),
    }
}

fn to_radians(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_radians()
    } else {
        v
    }
}

fn check_epsilon(e: f64) -> Result<f64> {
    if (-1e-12..=FRAC_PI_2 + 1e-12).contains(&e) {
        Ok(e.clamp(0.0, FRAC_PI_2))
    } else {
        Err(Error::Usage(format!("ε = {e} is outside [0, π/2]")))
    }
}

enum Sink {
    Csv(csv::Writer<Box<dyn Write>>),
    Jsonl(Box<dyn Write>),
}

/// Serializes rows as CSV or JSON lines.
pub struct TableWriter {
    sink: Sink,
    path: PathBuf,
}

impl TableWriter {
    pub fn new(sink: Box<dyn Write>, path: PathBuf, format: Format) -> Self {
        let sink = match format {
            Format::Csv => Sink::Csv(csv::Writer::from_writer(sink)),
            Format::Jsonl => Sink::Jsonl(sink),
        };
        Self { sink, path }
    }

    /// Opens `out.output` (joined to `out.output_dir` when relative) or stdout.
    pub fn open(out: &OutputArgs) -> Result<Self> {
        match resolve_output(out.output.as_deref(), out.output_dir.as_deref()) {
            Some(path) => {
                let f = File::create(&path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(Self::new(Box::new(BufWriter::new(f)), path, out.format))
            }
            None => Ok(Self::new(Box::new(io::stdout().lock()), "<stdout>".into(), out.format)),
        }
    }

    fn io(&self, source: io::Error) -> Error {
        Error::Io {
            path: self.path.clone(),
            source,
        }
    }

    pub fn row<T: Serialize>(&mut self, row: &T) -> Result<()> {
        let res = match &mut self.sink {
            Sink::Csv(w) => w.serialize(row).map_err(io::Error::from),
            Sink::Jsonl(w) => serde_json::to_string(row)
                .map_err(io::Error::from)
                .and_then(|line| writeln!(w, "{line}")),
        };
        res.map_err(|e| self.io(e))
    }

    pub fn finish(mut self) -> Result<()> {
        let res = match &mut self.sink {
            Sink::Csv(w) => w.flush(),
            Sink::Jsonl(w) => w.flush(),
        };
        res.map_err(|e| self.io(e))
    }
}

pub fn resolve_output(output: Option<&Path>, dir: Option<&Path>) -> Option<PathBuf> {
    output.map(|p| match dir {
        Some(d) if p.is_relative() => d.join(p),
        _ => p.to_path_buf(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub i1_closed: f64,
    pub i2_closed: f64,
    pub i1_model: f64,
    pub i2_model: f64,
    pub i1_mc: Option<f64>,
    pub i1_mc_err: Option<f64>,
    pub i2_mc: Option<f64>,
    pub i2_mc_err: Option<f64>,
    pub double_violation: bool,
    pub classical_bound: f64,
    pub tsirelson_bound: f64,
}

/// Rows of `seqbell sweep`.
pub fn sweep_rows(grid: &[f64], phi0: f64, visibility: f64, mc: Option<&AcquisitionPlan>) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Usage("empty ε grid".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(k, &e)| {
            let e = check_epsilon(e)?;
            let cfg = WeakConfig::new(e)?.with_phi0(phi0)?.with_visibility(visibility)?;
            let (i1, i2) = chsh_pair(&cfg)?;
            let i1c = visibility * closed_form_i1(e, phi0);
            let i2c = visibility * closed_form_i2(e);
            let mc = match mc {
                Some(plan) => {
                    let rec = simulate_counts(&plan.with_seed(trial_seed(plan.seed, k)), &cfg)?;
                    Some(estimate_both(&rec)?)
                }
                None => None,
            };
            Ok(SweepRow {
                epsilon: e,
                i1_closed: i1c,
                i2_closed: i2c,
                i1_model: i1,
                i2_model: i2,
                i1_mc: mc.map(|m| m.0.value),
                i1_mc_err: mc.map(|m| m.0.std_error),
                i2_mc: mc.map(|m| m.1.value),
                i2_mc_err: mc.map(|m| m.1.std_error),
                double_violation: i1c > CLASSICAL_BOUND && i2c > CLASSICAL_BOUND,
                classical_bound: CLASSICAL_BOUND,
                tsirelson_bound: TSIRELSON_BOUND,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    /// `trial` or `mean`.
    pub kind: &'static str,
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon: f64,
    pub phi0: f64,
    pub visibility: f64,
    pub i1: f64,
    pub i1_err: f64,
    pub i2: f64,
    pub i2_err: f64,
    pub i1_violates: bool,
    pub i2_violates: bool,
}

/// Rows of `seqbell trials`: one per trial, then the series mean with its standard error.
pub fn trial_rows(n: usize, plan: &AcquisitionPlan, cfg: &WeakConfig) -> Result<Vec<TrialRow>> {
    let trials = run_trials(n, plan, cfg)?;
    let summary = summarize(&trials)?;
    let row = |kind, trial, seed, i1: f64, i1_err, i2: f64, i2_err| TrialRow {
        kind,
        trial,
        seed,
        epsilon: cfg.epsilon,
        phi0: cfg.phi0,
        visibility: cfg.visibility,
        i1,
        i1_err,
        i2,
        i2_err,
        i1_violates: i1 > CLASSICAL_BOUND,
        i2_violates: i2 > CLASSICAL_BOUND,
    };
    let mut rows: Vec<TrialRow> = trials
        .iter()
        .map(|t| {
            row(
                "trial",
                Some(t.trial),
                Some(t.seed),
                t.ab1.value,
                t.ab1.std_error,
                t.ab2.value,
                t.ab2.std_error,
            )
        })
        .collect();
    let err = |s: crate::montecarlo::SeriesStats| if n > 1 { s.mean_error } else { s.mean_std_error };
    rows.push(row(
        "mean",
        None,
        None,
        summary.ab1.mean,
        err(summary.ab1),
        summary.ab2.mean,
        err(summary.ab2),
    ));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    /// Input path, or `stability` for the summary row.
    pub file: String,
    pub chi: Option<f64>,
    pub chi_err: Option<f64>,
    pub theta0: Option<f64>,
    pub theta0_err: Option<f64>,
    pub amplitude_h: Option<f64>,
    pub amplitude_h_err: Option<f64>,
    pub phase_h: Option<f64>,
    pub phase_h_err: Option<f64>,
    pub background_h: Option<f64>,
    pub background_h_err: Option<f64>,
    pub amplitude_v: Option<f64>,
    pub amplitude_v_err: Option<f64>,
    pub phase_v: Option<f64>,
    pub phase_v_err: Option<f64>,
    pub background_v: Option<f64>,
    pub background_v_err: Option<f64>,
    pub epsilon: f64,
    /// Fit error per file; RMS about the mean for the stability row.
    pub epsilon_err: f64,
    pub chi_square: Option<f64>,
    pub dof: Option<usize>,
}

impl CalibrationRow {
    pub fn from_fit(file: String, f: &FitResult) -> Self {
        Self {
            file,
            chi: Some(f.chi),
            chi_err: Some(f.chi_err),
            theta0: Some(f.theta0),
            theta0_err: Some(f.theta0_err),
            amplitude_h: Some(f.h.amplitude),
            amplitude_h_err: Some(f.h.amplitude_err),
            phase_h: Some(f.h.phase),
            phase_h_err: Some(f.h.phase_err),
            background_h: Some(f.h.background),
            background_h_err: Some(f.h.background_err),
            amplitude_v: Some(f.v.amplitude),
            amplitude_v_err: Some(f.v.amplitude_err),
            phase_v: Some(f.v.phase),
            phase_v_err: Some(f.v.phase_err),
            background_v: Some(f.v.background),
            background_v_err: Some(f.v.background_err),
            epsilon: f.epsilon,
            epsilon_err: f.epsilon_err,
            chi_square: Some(f.chi_square),
            dof: Some(f.dof),
        }
    }

    fn summary(mean: f64, rms: f64) -> Self {
        Self {
            file: "stability".into(),
            chi: None,
            chi_err: None,
            theta0: None,
            theta0_err: None,
            amplitude_h: None,
            amplitude_h_err: None,
            phase_h: None,
            phase_h_err: None,
            background_h: None,
            background_h_err: None,
            amplitude_v: None,
            amplitude_v_err: None,
            phase_v: None,
            phase_v_err: None,
            background_v: None,
            background_v_err: None,
            epsilon: mean,
            epsilon_err: rms,
            chi_square: None,
            dof: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub file: String,
    pub theta: f64,
    pub residual_h: f64,
    pub residual_v: f64,
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let grid = match (&a.epsilon_grid, a.epsilon.is_empty()) {
        (Some(g), _) => parse_grid(g)?,
        (None, false) => a.epsilon.iter().map(|e| parse_angle(e)).collect::<Result<_>>()?,
        (None, true) => return Err(Error::Usage("give --epsilon or --epsilon-grid".into())),
    };
    let grid: Vec<f64> = grid.into_iter().map(|e| to_radians(e, a.degrees)).collect();
    let phi0 = to_radians(parse_angle(&a.phi0)?, a.degrees);
    let plan = if a.monte_carlo {
        Some(AcquisitionPlan::new(a.plan.duration, a.plan.rate, a.plan.seed)?)
    } else {
        None
    };
    let rows = sweep_rows(&grid, phi0, a.visibility, plan.as_ref())?;
    let mut w = TableWriter::open(&a.out)?;
    for r in &rows {
        w.row(r)?;
    }
    w.finish()?;
    Ok(EXIT_OK)
}

fn cmd_trials(a: &TrialsArgs) -> Result<i32> {
    let eps = check_epsilon(to_radians(parse_angle(&a.epsilon)?, a.degrees))?;
    let phi0 = to_radians(parse_angle(&a.phi0)?, a.degrees);
    let visibility = if a.emulation_preset {
        EMULATION_VISIBILITY
    } else {
        a.visibility.unwrap_or(1.0)
    };
    let cfg = WeakConfig::new(eps)?.with_phi0(phi0)?.with_visibility(visibility)?;
    let plan = AcquisitionPlan::new(a.plan.duration, a.plan.rate, a.plan.seed)?;
    let rows = trial_rows(a.trials, &plan, &cfg)?;
    let mut w = TableWriter::open(&a.out)?;
    for r in &rows {
        w.row(r)?;
    }
    w.finish()?;
    Ok(EXIT_OK)
}

fn cmd_calibrate(a: &CalibrateArgs) -> Result<i32> {
    let mut fits = Vec::with_capacity(a.input.len());
    let mut residuals = Vec::new();
    for path in &a.input {
        let scan = read_scan(path)?;
        let fit = fit_scan(&scan, None).map_err(|e| match e {
            Error::NonConvergence(m) => Error::NonConvergence(format!("{}: {m}", path.display())),
            Error::RankDeficient(m) => Error::RankDeficient(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let name = path.display().to_string();
        residuals.extend(fit.residuals(&scan).into_iter().map(|(theta, h, v)| ResidualRow {
            file: name.clone(),
            theta,
            residual_h: h,
            residual_v: v,
        }));
        fits.push((name, fit));
    }
    let mut w = TableWriter::open(&a.out)?;
    for (name, f) in &fits {
        w.row(&CalibrationRow::from_fit(name.clone(), f))?;
    }
    if a.stability {
        let fits: Vec<FitResult> = fits.iter().map(|(_, f)| f.clone()).collect();
        let s = stability_of_fits(&fits).map_err(|_| Error::Usage("--stability needs at least two inputs".into()))?;
        w.row(&CalibrationRow::summary(s.mean, s.rms))?;
    }
    w.finish()?;
    if let Some(path) = &a.residuals {
        let out = OutputArgs {
            output: Some(path.clone()),
            output_dir: a.out.output_dir.clone(),
            format: a.out.format,
        };
        let mut w = TableWriter::open(&out)?;
        for r in &residuals {
            w.row(r)?;
        }
        w.finish()?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct VerifyRow {
    check: &'static str,
    status: &'static str,
    observed: f64,
    tolerance: String,
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let fault = a.inject_fault.map(|f| match f {
        InjectFault::R1Normalization => Fault::R1Normalization,
    });
    let report = verify_report(fault);
    let mut w = TableWriter::open(&a.out)?;
    for r in &report {
        w.row(&VerifyRow {
            check: r.check,
            status: if r.passed { "pass" } else { "fail" },
            observed: r.observed,
            tolerance: r.tolerance.clone(),
        })?;
    }
    w.finish()?;
    Ok(if all_passed(&report) { EXIT_OK } else { EXIT_INVARIANT })
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Trials(a) => cmd_trials(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("seqbell: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, PI, SQRT_2};

    #[test]
    fn angle_parsing() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert!((parse_angle("pi/3").unwrap() - FRAC_PI_3).abs() < 1e-15);
        assert!((parse_angle("2*pi/3").unwrap() - 2.0 * FRAC_PI_3).abs() < 1e-15);
        assert!((parse_angle("2pi/3").unwrap() - 2.0 * FRAC_PI_3).abs() < 1e-15);
        assert_eq!(parse_angle("-pi/2").unwrap(), -FRAC_PI_2);
        assert_eq!(parse_angle(" 1.5 ").unwrap(), 1.5);
        assert!(parse_angle("x").is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(matches!(parse_grid(""), Err(Error::Usage(_))));
        assert!(matches!(parse_grid("0:1:0"), Err(Error::Usage(_))));
    }

    #[test]
    fn sweep_reference_rows() {
        let rows = sweep_rows(&[0.0, FRAC_PI_3, FRAC_PI_2], 0.0, 1.0, None).unwrap();
        let expect = [(0.0, 2.0 * SQRT_2), (1.5 * SQRT_2, 1.5 * SQRT_2), (2.0 * SQRT_2, SQRT_2)];
        for (r, (i1, i2)) in rows.iter().zip(expect) {
            assert!((r.i1_closed - i1).abs() < 1e-12 && (r.i2_closed - i2).abs() < 1e-12);
            assert!((r.i1_model - i1).abs() < 1e-10 && (r.i2_model - i2).abs() < 1e-10);
        }
        assert_eq!(rows.iter().map(|r| r.double_violation).collect::<Vec<_>>(), [false, true, false]);
        assert!(matches!(sweep_rows(&[], 0.0, 1.0, None), Err(Error::Usage(_))));
        assert!(sweep_rows(&[2.0], 0.0, 1.0, None).is_err());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::Usage(String::new())),
            exit_code(&Error::Io {
                path: "x".into(),
                source: io::Error::other("x"),
            }),
            exit_code(&Error::NonConvergence(String::new())),
            EXIT_INVARIANT,
        ];
        for (i, a) in codes.iter().enumerate() {
            assert_ne!(*a, EXIT_OK);
            for b in &codes[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }
}
