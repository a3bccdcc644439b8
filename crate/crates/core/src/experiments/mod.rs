//! Convergence studies: reference solutions, error metrics, slope fits and
//! mass audits.
//!
//! A study evolves the same initial field with every requested scheme for a
//! dyadic family of step sizes `tau_j = T 2^{-j}`, compares each final state
//! with a shared fine-step reference, and fits `log2(error)` against
//! `log2(tau)` by least squares.

mod output;

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{gnuplot_script, write_csv, CSV_HEADER};

use crate::datagen::{plane_wave, rough_field, smooth_field, RoughDataSpec};
use crate::error::{Error, Result};
use crate::flows::Lambda;
use crate::integrators::{
    evolve_with, theoretical_rate, HighPhase, SchemeKind, SchemeSpec, Stepper,
};
use crate::spectral::{GridSpec, SpectralField};

/// Relative tolerance of the reference cross-check, in units of `||u0||_{L^2}`.
pub const REFERENCE_TOLERANCE: f64 = 1e-7;

/// Rows with error below this multiple of the reference disagreement are
/// excluded from slope fits.
pub const SATURATION_FACTOR: f64 = 10.0;

/// Minimum number of usable rows for a slope fit.
pub const MIN_FIT_ROWS: usize = 4;

/// Initial condition of a study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    /// [`rough_field`] with the study's `gamma` and `seed`.
    Rough,
    /// `A e^{imx}`.
    PlaneWave { re: f64, im: f64, wavenumber: i64 },
    /// [`smooth_field`].
    Smooth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Regularity of the data; also selects the cutoff law.
    pub gamma: f64,
    pub t_final: f64,
    /// Step sizes, strictly decreasing, each dividing `t_final` exactly.
    pub taus: Vec<f64>,
    pub seed: u64,
    pub modes: usize,
    pub schemes: Vec<SchemeKind>,
    pub lambda: Lambda,
    pub initial: InitialData,
    /// Power `p` for `modified-power`.
    pub power: u32,
    pub high_phase: HighPhase,
    /// `tau_ref = min(taus) / reference_refinement`.
    pub reference_refinement: u32,
    /// Number of equally spaced times (ending at `T`) at which errors are
    /// measured. `1` measures at `T` only.
    pub checkpoints: usize,
    /// Worker threads for the `(scheme, tau)` cells; `None` uses the default pool.
    #[serde(default)]
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// Rough data, `taus = tau_max 2^{-j}` for `j = 0 .. levels`.
    pub fn dyadic(
        gamma: f64,
        t_final: f64,
        tau_max: f64,
        levels: usize,
        modes: usize,
        seed: u64,
        schemes: Vec<SchemeKind>,
    ) -> Self {
        Self {
            gamma,
            t_final,
            taus: (0..levels)
                .map(|j| tau_max * 0.5f64.powi(j as i32))
                .collect(),
            seed,
            modes,
            schemes,
            lambda: Lambda::Focusing,
            initial: InitialData::Rough,
            power: 1,
            high_phase: HighPhase::default(),
            reference_refinement: 64,
            checkpoints: 1,
            jobs: None,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.modes)
    }

    pub fn steps_for(&self, tau: f64) -> Result<usize> {
        steps_for(self.t_final, tau)
    }

    pub fn initial_field(&self) -> Result<SpectralField> {
        let grid = self.grid()?;
        match self.initial {
            InitialData::Rough => rough_field(&RoughDataSpec::new(self.gamma, self.seed, self.modes)),
            InitialData::PlaneWave { re, im, wavenumber } => {
                plane_wave(Complex64::new(re, im), wavenumber, grid)
            }
            InitialData::Smooth => smooth_field(grid),
        }
    }

    pub fn reference_tau(&self) -> Option<f64> {
        self.taus
            .last()
            .map(|&t| t / f64::from(self.reference_refinement))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let grid = self.grid()?;
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return bad(format!("final time must be positive, got {}", self.t_final));
        }
        if self.taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("step sizes must be positive".into());
        }
        if self.taus.windows(2).any(|w| w[1] >= w[0]) {
            return bad("step sizes must be strictly decreasing".into());
        }
        if self.reference_refinement < 2 || !self.reference_refinement.is_power_of_two() {
            return bad(format!(
                "reference refinement must be a power of two >= 2, got {}",
                self.reference_refinement
            ));
        }
        if self.power == 0 {
            return bad("power p must be at least 1".into());
        }
        if self.checkpoints == 0 {
            return bad("at least one checkpoint is required".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        for &tau in &self.taus {
            let steps = self.steps_for(tau)?;
            if steps % self.checkpoints != 0 {
                return bad(format!(
                    "{} checkpoints do not divide the {steps} steps of tau = {tau}",
                    self.checkpoints
                ));
            }
        }
        if let Some(&tau_min) = self.taus.last() {
            // every cutoff is bounded by the one at the smallest step
            for kind in &self.schemes {
                if let Some(n) = kind.cutoff_for(self.gamma, tau_min).ok().flatten() {
                    if n > grid.modes() / 8 {
                        return Err(Error::UnderResolved {
                            cutoff: n,
                            limit: grid.modes() / 8,
                            modes: grid.modes(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn steps_for(t_final: f64, tau: f64) -> Result<usize> {
    let ratio = t_final / tau;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio {
        return Err(Error::InvalidConfig(format!(
            "step size {tau} does not divide the final time {t_final}"
        )));
    }
    Ok(steps as usize)
}

/// `L^2` distance `(2 pi sum |a_k - b_k|^2)^{1/2}`.
pub fn l2_error(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    Ok(a.sub(b)?.l2_norm())
}

/// `max_n |mass_n - M0| / M0`; absolute deviation when `M0 = 0`.
pub fn mass_drift(trace: &[f64], mass0: f64) -> f64 {
    let dev = trace
        .iter()
        .map(|m| (m - mass0).abs())
        .fold(0.0, f64::max);
    if mass0 > 0.0 {
        dev / mass0
    } else {
        dev
    }
}

/// Least-squares slope of `log2(error)` against `log2(tau)`.
///
/// Rows with non-finite or nonpositive error, or error below
/// `SATURATION_FACTOR * reference_floor`, are discarded first.
pub fn fit_slope(rows: &[(f64, f64)], reference_floor: f64) -> Result<f64> {
    let usable: Vec<(f64, f64)> = usable_rows(rows, reference_floor)
        .map(|(t, e)| (t.log2(), e.log2()))
        .collect();
    if usable.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData {
            usable: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { usable: 1 });
    }
    Ok(sxy / sxx)
}

fn usable_rows(rows: &[(f64, f64)], floor: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    rows.iter().copied().filter(move |&(t, e)| {
        t.is_finite() && t > 0.0 && e.is_finite() && e > 0.0 && e >= SATURATION_FACTOR * floor
    })
}

/// `alpha(gamma) = 1 + gamma - (1 - 2 gamma)_+^2 / (1 + (1 - 2 gamma)_+)`.
pub fn alpha(gamma: f64) -> f64 {
    let d = (1.0 - 2.0 * gamma).max(0.0);
    1.0 + gamma - d * d / (1.0 + d)
}

/// Error model `N^{-min(2 gamma, alpha)} + tau N^{-gamma} + tau^2 N^{4 - gamma}`,
/// without the unknown constant.
pub fn predicted_bound(gamma: f64, tau: f64, cutoff: usize) -> Result<f64> {
    theoretical_rate(gamma)?;
    let n = cutoff as f64;
    Ok(n.powf(-(2.0 * gamma).min(alpha(gamma)))
        + tau * n.powf(-gamma)
        + tau * tau * n.powf(4.0 - gamma))
}

/// Fine-step solution shared by all cells of a study.
#[derive(Clone, Debug)]
pub struct Reference {
    /// Fields at the checkpoint times; the last one is at `T`.
    pub checkpoints: Vec<SpectralField>,
    pub meta: ReferenceMeta,
}

impl Reference {
    pub fn final_field(&self) -> &SpectralField {
        self.checkpoints.last().expect("at least one checkpoint")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeta {
    pub scheme: SchemeKind,
    pub tau_ref: f64,
    pub steps: usize,
    pub check_scheme: SchemeKind,
    pub check_tau: f64,
    /// `L^2` distance between the reference and the cross-check at `T`.
    pub disagreement: f64,
    pub threshold: f64,
}

fn run_checkpoints(
    stepper: &mut Stepper,
    u0: &SpectralField,
    steps: usize,
    checkpoints: usize,
    mut observer: Option<&mut dyn FnMut(usize, f64, &SpectralField)>,
) -> Result<Vec<SpectralField>> {
    let chunk = steps / checkpoints;
    let mut out = Vec::with_capacity(checkpoints);
    let mut u = u0.clone();
    let tau = stepper.spec().tau;
    for c in 0..checkpoints {
        let offset = c * chunk;
        u = match observer.as_mut() {
            Some(obs) => {
                let mut shifted = |n: usize, _t: f64, f: &SpectralField| {
                    obs(offset + n, (offset + n) as f64 * tau, f)
                };
                evolve_with(stepper, &u, chunk, Some(&mut shifted))
            }
            None => evolve_with(stepper, &u, chunk, None),
        }
        .map_err(|e| match e {
            Error::NonFinite { step, .. } => Error::NonFinite {
                step: offset + step,
                time: (offset + step) as f64 * tau,
            },
            other => other,
        })?;
        out.push(u.clone());
    }
    Ok(out)
}

/// Strang at `tau_ref = min(taus) / refinement`, cross-checked by Strang at
/// `2 tau_ref`.
///
/// For a second-order method the cross-check disagreement is about three
/// times the reference error, so it bounds the reference bias. The study is
/// aborted when it exceeds `REFERENCE_TOLERANCE * ||u0||`.
pub fn reference_solution(config: &RunConfig) -> Result<Reference> {
    config.validate()?;
    let u0 = config.initial_field()?;
    reference_from(config, &u0)
}

fn reference_from(config: &RunConfig, u0: &SpectralField) -> Result<Reference> {
    let tau_ref = config
        .reference_tau()
        .ok_or_else(|| Error::InvalidConfig("no step sizes given".into()))?;
    let steps = steps_for(config.t_final, tau_ref)?;
    let check_tau = 2.0 * tau_ref;
    let check_steps = steps / 2;
    let spec = |tau| {
        SchemeSpec::new(SchemeKind::Strang, config.lambda, tau).with_mass0(u0.mass())
    };
    let (fine, check) = rayon::join(
        || -> Result<Vec<SpectralField>> {
            let mut st = Stepper::new(spec(tau_ref), u0.grid())?;
            run_checkpoints(&mut st, u0, steps, config.checkpoints, None)
        },
        || -> Result<SpectralField> {
            let mut st = Stepper::new(spec(check_tau), u0.grid())?;
            evolve_with(&mut st, u0, check_steps, None)
        },
    );
    let fine = fine?;
    let check = check?;
    let disagreement = l2_error(fine.last().expect("checkpoint"), &check)?;
    let threshold = REFERENCE_TOLERANCE * u0.l2_norm();
    if disagreement > threshold {
        return Err(Error::UnreliableReference {
            disagreement,
            threshold,
        });
    }
    Ok(Reference {
        checkpoints: fine,
        meta: ReferenceMeta {
            scheme: SchemeKind::Strang,
            tau_ref,
            steps,
            check_scheme: SchemeKind::Strang,
            check_tau,
            disagreement,
            threshold,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Skipped(String),
    Failed(String),
}

/// Result of one `(scheme, tau)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: SchemeKind,
    pub tau: f64,
    pub steps: usize,
    pub cutoff: Option<usize>,
    pub error_l2: Option<f64>,
    /// Largest error over the checkpoint times (equals `error_l2` with one
    /// checkpoint).
    pub max_checkpoint_error: Option<f64>,
    pub mass_drift: Option<f64>,
    pub wall_ms: f64,
    #[serde(flatten)]
    pub status: CellStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub scheme: SchemeKind,
    pub slope: Option<f64>,
    pub rows_used: usize,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: RunConfig,
    pub mass0: f64,
    pub initial_l2: f64,
    /// Rate predicted for the modified schemes, when `gamma` is in range.
    pub predicted_rate: Option<f64>,
    pub reference: Option<ReferenceMeta>,
    pub rows: Vec<ReportRow>,
    pub slopes: Vec<SlopeFit>,
}

impl ConvergenceReport {
    pub fn slope(&self, scheme: SchemeKind) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.scheme == scheme)
            .and_then(|s| s.slope)
    }

    pub fn rows_for(&self, scheme: SchemeKind) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    pub fn any_failed(&self) -> bool {
        self.rows
            .iter()
            .any(|r| matches!(r.status, CellStatus::Failed(_)))
    }
}

fn run_cell(
    config: &RunConfig,
    u0: &SpectralField,
    reference: &Reference,
    kind: SchemeKind,
    tau: f64,
) -> ReportRow {
    let started = Instant::now();
    let mut row = ReportRow {
        scheme: kind,
        tau,
        steps: 0,
        cutoff: None,
        error_l2: None,
        max_checkpoint_error: None,
        mass_drift: None,
        wall_ms: 0.0,
        status: CellStatus::Ok,
    };
    let cutoff = match kind.cutoff_for(config.gamma, tau) {
        Ok(c) => c,
        Err(e) => {
            row.status = CellStatus::Skipped(e.to_string());
            return row;
        }
    };
    row.cutoff = cutoff;
    let spec = SchemeSpec::new(kind, config.lambda, tau)
        .with_cutoff(cutoff.unwrap_or(0))
        .with_power(config.power)
        .with_mass0(u0.mass())
        .with_high_phase(config.high_phase);
    let result = (|| -> Result<(usize, Vec<SpectralField>, f64)> {
        let steps = config.steps_for(tau)?;
        let mut stepper = Stepper::new(spec, u0.grid())?;
        let mut trace = Vec::with_capacity(steps + 1);
        trace.push(u0.mass());
        let mut record = |_n: usize, _t: f64, f: &SpectralField| trace.push(f.mass());
        let fields =
            run_checkpoints(&mut stepper, u0, steps, config.checkpoints, Some(&mut record))?;
        Ok((steps, fields, mass_drift(&trace, u0.mass())))
    })();
    match result {
        Ok((steps, fields, drift)) => {
            row.steps = steps;
            let errors: Result<Vec<f64>> = fields
                .iter()
                .zip(&reference.checkpoints)
                .map(|(a, b)| l2_error(a, b))
                .collect();
            match errors {
                Ok(errors) => {
                    row.error_l2 = errors.last().copied();
                    row.max_checkpoint_error = Some(errors.iter().copied().fold(0.0, f64::max));
                    row.mass_drift = Some(drift);
                }
                Err(e) => row.status = CellStatus::Failed(e.to_string()),
            }
        }
        Err(e @ (Error::InfeasibleStep { .. } | Error::UnderResolved { .. })) => {
            row.status = CellStatus::Skipped(e.to_string())
        }
        Err(e) => row.status = CellStatus::Failed(e.to_string()),
    }
    row.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    row
}

fn fit_scheme(
    kind: SchemeKind,
    rows: &[ReportRow],
    floor: f64,
    initial_l2: f64,
) -> SlopeFit {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.scheme == kind && r.status == CellStatus::Ok)
        .filter_map(|r| r.error_l2.map(|e| (r.tau, e)))
        .collect();
    let used: Vec<(f64, f64)> = usable_rows(&points, floor).collect();
    let mut fit = SlopeFit {
        scheme: kind,
        slope: None,
        rows_used: used.len(),
        tau_min: used.iter().map(|p| p.0).reduce(f64::min),
        tau_max: used.iter().map(|p| p.0).reduce(f64::max),
        note: None,
    };
    let roundoff = ROUNDOFF_LEVEL * initial_l2.max(f64::MIN_POSITIVE);
    if !points.is_empty() && points.iter().all(|p| p.1 <= roundoff) {
        fit.note = Some("degenerate: all errors at round-off level".into());
        return fit;
    }
    match fit_slope(&points, floor) {
        Ok(s) => fit.slope = Some(s),
        Err(e) => fit.note = Some(e.to_string()),
    }
    fit
}

/// Errors below this multiple of `||u0||` count as exact.
const ROUNDOFF_LEVEL: f64 = 1e-11;

/// Runs every `(scheme, tau)` cell of `config` against a shared reference.
pub fn convergence_study(config: &RunConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let u0 = config.initial_field()?;
    let mut report = ConvergenceReport {
        config: config.clone(),
        mass0: u0.mass(),
        initial_l2: u0.l2_norm(),
        predicted_rate: theoretical_rate(config.gamma).ok(),
        reference: None,
        rows: Vec::new(),
        slopes: Vec::new(),
    };
    if config.schemes.is_empty() || config.taus.is_empty() {
        return Ok(report);
    }

    let mut cells: Vec<(SchemeKind, f64)> = config
        .schemes
        .iter()
        .flat_map(|&k| config.taus.iter().map(move |&t| (k, t)))
        .collect();
    cells.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
    cells.dedup();

    let work = || -> Result<(Reference, Vec<ReportRow>)> {
        let reference = reference_from(config, &u0)?;
        let rows = cells
            .par_iter()
            .map(|&(k, t)| run_cell(config, &u0, &reference, k, t))
            .collect();
        Ok((reference, rows))
    };
    let (reference, rows) = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let floor = reference.meta.disagreement;
    let mut kinds: Vec<SchemeKind> = config.schemes.clone();
    kinds.sort();
    kinds.dedup();
    report.slopes = kinds
        .into_iter()
        .map(|k| fit_scheme(k, &rows, floor, report.initial_l2))
        .collect();
    report.reference = Some(reference.meta);
    report.rows = rows;
    Ok(report)
}
