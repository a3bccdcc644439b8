//! Command-line front end.
//!
//! Exit codes: `0` success, `2` usage or validation error, `3` numerical abort
//! (non-finite state, unreliable reference, failed cells), `4` mass contract
//! violation.
//!
//! Every subcommand also accepts `--config <file>` with `key = value` lines
//! named like the long flags; flags given on the command line take precedence.

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    convergence_study, gnuplot_script, l2_error, mass_drift, predicted_bound, write_csv,
    CellStatus, InitialData, RunConfig,
};
use crate::flows::Lambda;
use crate::integrators::{
    choose_cutoff, evolve_with, theoretical_rate, HighPhase, SchemeKind, SchemeSpec, Stepper,
};
use crate::snapshot::{load_snapshot, write_snapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CONTRACT: i32 = 4;

/// Relative mass drift tolerated by the conserving schemes.
pub const CONSERVATION_TOLERANCE: f64 = 1e-11;
/// Per-step mass increase tolerated by the contracting schemes, relative to `M0`.
pub const MONOTONE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "nlsplit",
    version,
    about = "Splitting integrators for the cubic NLS on the torus"
)]
pub struct Cli {
    /// key=value file with defaults for the subcommand's flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve once and write the final snapshot plus a JSON sidecar
    Run(RunArgs),
    /// Convergence sweep over dyadic step sizes; writes CSV and JSON
    Converge(ConvergeArgs),
    /// Audit the discrete mass against the scheme's contract
    MassCheck(MassCheckArgs),
    /// L2 distance between two snapshots
    Compare(CompareArgs),
    /// Tabulate cutoff, predicted error bound and rate
    Predict(PredictArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Rough,
    PlaneWave,
    Smooth,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Regularity gamma of the data (and of the cutoff law)
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1024)]
    pub modes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// +1 focusing, -1 defocusing
    #[arg(long, default_value = "+1", allow_hyphen_values = true)]
    pub lambda: Lambda,
    #[arg(long, value_enum, default_value_t = InitKind::Rough)]
    pub init: InitKind,
    /// Plane-wave amplitude (real)
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Plane-wave wavenumber
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub wavenumber: i64,
    /// Power p of the modified-power scheme
    #[arg(long, default_value_t = 1)]
    pub power: u32,
    /// High-frequency phase rate convention (resonant or literal)
    #[arg(long, default_value = "resonant")]
    pub high_phase: HighPhase,
}

impl DataArgs {
    fn initial(&self) -> InitialData {
        match self.init {
            InitKind::Rough => InitialData::Rough,
            InitKind::PlaneWave => InitialData::PlaneWave {
                re: self.amplitude,
                im: 0.0,
                wavenumber: self.wavenumber,
            },
            InitKind::Smooth => InitialData::Smooth,
        }
    }

    fn base_config(&self, t_final: f64, taus: Vec<f64>, schemes: Vec<SchemeKind>) -> RunConfig {
        RunConfig {
            gamma: self.gamma,
            t_final,
            taus,
            seed: self.seed,
            modes: self.modes,
            schemes,
            lambda: self.lambda,
            initial: self.initial(),
            power: self.power,
            high_phase: self.high_phase,
            reference_refinement: 64,
            checkpoints: 1,
            jobs: None,
        }
    }

    fn spec(&self, kind: SchemeKind, tau: f64, mass0: f64) -> Result<SchemeSpec> {
        let cutoff = kind.cutoff_for(self.gamma, tau)?.unwrap_or(0);
        Ok(SchemeSpec::new(kind, self.lambda, tau)
            .with_cutoff(cutoff)
            .with_power(self.power)
            .with_mass0(mass0)
            .with_high_phase(self.high_phase))
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scheme: SchemeKind,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tmax: f64,
    #[command(flatten)]
    pub data: DataArgs,
    /// Snapshot path; the sidecar is written to `<out>.json`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Comma-separated scheme list
    #[arg(long, value_delimiter = ',', default_value = "modified-v2")]
    pub schemes: Vec<SchemeKind>,
    #[arg(long, default_value_t = 1.0)]
    pub tmax: f64,
    /// Largest step; must be tmax / 2^j
    #[arg(long)]
    pub tau_max: f64,
    /// Number of dyadic step sizes
    #[arg(long)]
    pub levels: usize,
    #[command(flatten)]
    pub data: DataArgs,
    /// tau_ref = smallest tau / refinement
    #[arg(long, default_value_t = 64)]
    pub refinement: u32,
    /// Equally spaced times at which errors are measured (max is reported)
    #[arg(long, default_value_t = 1)]
    pub checkpoints: usize,
    /// Worker threads
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write a gnuplot script `<out>.gp`
    #[arg(long)]
    pub plot: bool,
    /// Output stem: writes `<out>.csv` and `<out>.json`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MassCheckArgs {
    #[arg(long)]
    pub scheme: SchemeKind,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub steps: usize,
    #[command(flatten)]
    pub data: DataArgs,
    /// JSON report path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub tau_max: f64,
    #[arg(long)]
    pub levels: usize,
}

/// Failure of a subcommand with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite { .. } | Error::UnreliableReference { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult = std::result::Result<i32, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `args` (including the program name), runs the subcommand and returns
/// the exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match splice_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            return e.code;
        }
    };
    let matches = Cli::command()
        .args_override_self(true)
        .mut_subcommands(|c| c.args_override_self(true))
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match matches {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Converge(a) => cmd_converge(&a, out, err),
        Command::MassCheck(a) => cmd_mass_check(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

/// Inserts the flags from a `--config` file right after the subcommand name,
/// so explicit flags (which come later) override them.
fn splice_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, CliError> {
    let strs: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut i = 0;
    while i < strs.len() {
        if strs[i] == "--config" {
            path = Some(
                strs.get(i + 1)
                    .ok_or_else(|| usage("--config needs a file"))?
                    .clone(),
            );
            i += 2;
            continue;
        }
        if let Some(p) = strs[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            i += 1;
            continue;
        }
        rest.push(args[i].clone());
        i += 1;
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let mut injected: Vec<OsString> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{path}:{}: expected key=value", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        match value {
            "true" => injected.push(format!("--{key}").into()),
            "false" => {}
            _ => injected.push(format!("--{key}={value}").into()),
        }
    }
    // position of the subcommand: first argument after the program name that
    // is not an option
    let sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(rest.len());
    let mut spliced = rest[..sub.min(rest.len())].to_vec();
    spliced.extend(injected);
    spliced.extend_from_slice(&rest[sub.min(rest.len())..]);
    Ok(spliced)
}

fn create_new(path: &Path) -> std::result::Result<fs::File, CliError> {
    OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn check_positive(name: &str, v: f64) -> std::result::Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

#[derive(Serialize)]
struct MassSummary {
    initial: f64,
    r#final: f64,
    min: f64,
    max: f64,
    max_drift: f64,
}

fn summarize(trace: &[f64], mass0: f64) -> MassSummary {
    MassSummary {
        initial: mass0,
        r#final: *trace.last().unwrap_or(&mass0),
        min: trace.iter().copied().fold(f64::INFINITY, f64::min),
        max: trace.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        max_drift: mass_drift(trace, mass0),
    }
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> CliResult {
    check_positive("tau", args.tau)?;
    check_positive("tmax", args.tmax)?;
    let data = &args.data;
    let config = data.base_config(args.tmax, vec![args.tau], vec![args.scheme]);
    let steps = config.steps_for(args.tau)?;
    let u0 = config.initial_field()?;
    let spec = data.spec(args.scheme, args.tau, u0.mass())?;
    let mut stepper = Stepper::new(spec, u0.grid())?;

    let started = Instant::now();
    let mut trace = vec![u0.mass()];
    let mut power_means: Vec<f64> = Vec::new();
    let mut u = u0.clone();
    for n in 1..=steps {
        u = evolve_with(&mut stepper, &u, 1, None).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite {
                step: n,
                time: n as f64 * args.tau,
            },
            other => other,
        })?;
        trace.push(u.mass());
        if let Some(mu) = stepper.last_power_mean() {
            power_means.push(mu);
        }
    }
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut snap = create_new(&args.out)?;
    write_snapshot(&u, &mut snap)?;
    let power_mean = (!power_means.is_empty()).then(|| {
        json!({
            "min": power_means.iter().copied().fold(f64::INFINITY, f64::min),
            "max": power_means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    });
    let sidecar = json!({
        "config": config,
        "scheme": spec,
        "steps": steps,
        "cutoff": args.scheme.uses_cutoff().then_some(spec.cutoff),
        "mass0": u0.mass(),
        "mass": summarize(&trace, u0.mass()),
        "power_mean": power_mean,
        "wall_ms": wall_ms,
    });
    let side = create_new(&with_extension(&args.out, "json"))?;
    serde_json::to_writer_pretty(side, &sidecar).map_err(Error::from)?;
    writeln!(
        out,
        "{}: {} steps of tau = {}, mass drift {:e}, wrote {}",
        args.scheme,
        steps,
        args.tau,
        mass_drift(&trace, u0.mass()),
        args.out.display()
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_converge(args: &ConvergeArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    check_positive("tau-max", args.tau_max)?;
    check_positive("tmax", args.tmax)?;
    if args.levels == 0 {
        return Err(usage("--levels must be at least 1"));
    }
    let taus = (0..args.levels)
        .map(|j| args.tau_max * 0.5f64.powi(j as i32))
        .collect();
    let mut config = args.data.base_config(args.tmax, taus, args.schemes.clone());
    config.reference_refinement = args.refinement;
    config.checkpoints = args.checkpoints;
    config.jobs = args.jobs;
    config.validate()?;

    let report = convergence_study(&config)?;

    let mut csv = create_new(&with_extension(&args.out, "csv"))?;
    write_csv(&report, &mut csv)?;
    let json_file = create_new(&with_extension(&args.out, "json"))?;
    serde_json::to_writer_pretty(json_file, &report).map_err(Error::from)?;
    if args.plot {
        let title = args
            .out
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "convergence".into());
        let mut gp = create_new(&with_extension(&args.out, "gp"))?;
        gp.write_all(gnuplot_script(&report, &title).as_bytes())?;
    }

    writeln!(out, "{:<16} {:>12} {:>6} {:>14} {:>12}", "scheme", "tau", "N", "error_l2", "mass_drift")?;
    for row in &report.rows {
        match &row.status {
            CellStatus::Ok => writeln!(
                out,
                "{:<16} {:>12.5e} {:>6} {:>14.6e} {:>12.3e}",
                row.scheme.name(),
                row.tau,
                row.cutoff.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
                row.error_l2.unwrap_or(f64::NAN),
                row.mass_drift.unwrap_or(f64::NAN),
            )?,
            CellStatus::Skipped(r) | CellStatus::Failed(r) => {
                writeln!(err, "warning: {} tau = {}: {r}", row.scheme, row.tau)?
            }
        }
    }
    for fit in &report.slopes {
        match fit.slope {
            Some(s) => writeln!(out, "slope {:<16} {s:.4} ({} rows)", fit.scheme.name(), fit.rows_used)?,
            None => writeln!(
                err,
                "warning: no slope for {}: {}",
                fit.scheme,
                fit.note.as_deref().unwrap_or("unavailable")
            )?,
        }
    }
    if let Some(rate) = report.predicted_rate {
        writeln!(out, "predicted rate for the modified schemes: {rate:.4}")?;
    }
    Ok(if report.any_failed() { EXIT_NUMERICAL } else { EXIT_OK })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassContract {
    Conservation,
    Nonincreasing,
    None,
}

pub fn mass_contract(kind: SchemeKind) -> MassContract {
    match kind {
        SchemeKind::ModifiedV2 | SchemeKind::ModifiedPower => MassContract::Conservation,
        SchemeKind::ModifiedV1 | SchemeKind::FilteredStrang => MassContract::Nonincreasing,
        SchemeKind::Lie | SchemeKind::Strang => MassContract::None,
    }
}

/// First step (index into `trace`) that breaks `contract`, with a description.
pub fn mass_violation(contract: MassContract, trace: &[f64], mass0: f64) -> Option<(usize, String)> {
    match contract {
        MassContract::Conservation => trace.iter().enumerate().find_map(|(n, &m)| {
            let drift = if mass0 > 0.0 { (m - mass0).abs() / mass0 } else { m };
            (drift > CONSERVATION_TOLERANCE).then(|| (n, format!("relative drift {drift:e}")))
        }),
        MassContract::Nonincreasing => trace.windows(2).enumerate().find_map(|(n, w)| {
            (w[1] - w[0] > MONOTONE_TOLERANCE * mass0)
                .then(|| (n + 1, format!("mass increased by {:e}", w[1] - w[0])))
        }),
        MassContract::None => None,
    }
}

pub fn cmd_mass_check(args: &MassCheckArgs, out: &mut dyn Write) -> CliResult {
    check_positive("tau", args.tau)?;
    let data = &args.data;
    let config = data.base_config(args.tau * args.steps.max(1) as f64, vec![args.tau], vec![args.scheme]);
    let u0 = config.initial_field()?;
    let mass0 = u0.mass();
    let spec = data.spec(args.scheme, args.tau, mass0)?;
    let mut stepper = Stepper::new(spec, u0.grid())?;
    let contract = mass_contract(args.scheme);

    let mut trace = vec![mass0];
    let mut u = u0.clone();
    for n in 1..=args.steps {
        stepper.step(&mut u)?;
        if !u.is_finite() {
            return Err(Error::NonFinite {
                step: n,
                time: n as f64 * args.tau,
            }
            .into());
        }
        trace.push(u.mass());
    }
    let violation = mass_violation(contract, &trace, mass0);
    let series: Vec<_> = trace
        .iter()
        .enumerate()
        .filter(|(n, _)| n % 1000 == 0 || *n == args.steps)
        .map(|(n, m)| json!({ "step": n, "mass": m, "drift": mass_drift(&[*m], mass0) }))
        .collect();
    let report = json!({
        "scheme": args.scheme,
        "tau": args.tau,
        "steps": args.steps,
        "gamma": data.gamma,
        "modes": data.modes,
        "seed": data.seed,
        "cutoff": args.scheme.uses_cutoff().then_some(spec.cutoff),
        "mass0": mass0,
        "max_drift": mass_drift(&trace, mass0),
        "contract": contract,
        "passed": violation.is_none(),
        "violation_step": violation.as_ref().map(|v| v.0),
        "violation": violation.as_ref().map(|v| v.1.clone()),
        "series": series,
    });
    let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    match &args.out {
        Some(path) => create_new(path)?.write_all(text.as_bytes())?,
        None => writeln!(out, "{text}")?,
    }
    match violation {
        Some((step, what)) => Err(CliError {
            code: EXIT_CONTRACT,
            message: format!("{} mass contract violated at step {step}: {what}", args.scheme),
        }),
        None => Ok(EXIT_OK),
    }
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> CliResult {
    let a = load_snapshot(&args.a)?;
    let b = load_snapshot(&args.b)?;
    let dist = l2_error(&a, &b)?;
    let scale = a.l2_norm().max(b.l2_norm());
    let rel = if scale > 0.0 { dist / scale } else { 0.0 };
    writeln!(out, "l2_distance {dist:.16e}")?;
    writeln!(out, "relative {rel:.16e}")?;
    writeln!(out, "mass_a {:.16e}", a.mass())?;
    writeln!(out, "mass_b {:.16e}", b.mass())?;
    Ok(EXIT_OK)
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> CliResult {
    check_positive("tau-max", args.tau_max)?;
    let rate = theoretical_rate(args.gamma)?;
    writeln!(out, "{:>14} {:>6} {:>16} {:>8}", "tau", "N", "predicted_bound", "rate")?;
    for j in 0..args.levels {
        let tau = args.tau_max * 0.5f64.powi(j as i32);
        let n = choose_cutoff(args.gamma, tau)?;
        let bound = predicted_bound(args.gamma, tau, n)?;
        writeln!(out, "{tau:>14.6e} {n:>6} {bound:>16.6e} {rate:>8.4}")?;
    }
    Ok(EXIT_OK)
}
