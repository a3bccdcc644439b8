//! One-step maps for the splitting schemes and multi-step evolution.
//!
//! Writing `E(t)` for the linear flow ([`SpectralField::free_flow`]), `Phi_t` for
//! the cubic phase flow, `P` / `Q` for the projections onto `|k| <= N` / `|k| > N`,
//! and `M0` for the mass of the initial data, one step of size `tau` is
//!
//! | scheme            | update                                                              |
//! |-------------------|---------------------------------------------------------------------|
//! | `lie`             | `E(tau) Phi_tau u`                                                  |
//! | `strang`          | `E(tau/2) Phi_tau E(tau/2) u`                                       |
//! | `filtered-strang` | `P E(tau/2) Phi_tau E(tau/2) P u`,  `N = floor(tau^{-1/2})`         |
//! | `modified-v1`     | `Q [e^{-i c1 lambda M0 tau} E(tau) u] + P E(tau/2) Phi_tau E(tau/2) P u` |
//! | `modified-v2`     | `E(tau/2) Psi_tau E(tau/2) (P + e^{-i c2 lambda M0 tau} Q) u`       |
//! | `modified-power`  | as `modified-v2` with `|P w|^{2p}` and `M0` replaced by `p mu_n`    |
//!
//! where `Psi_t(w) = e^{-i lambda t |P w|^{2p}} w` and `mu_n` is the grid mean of
//! `|u^n|^{2p}`. The constants `c1 = 2 c2` are set by [`HighPhase`]. The two
//! modified schemes pick `N` from the regularity of the data via
//! [`choose_cutoff`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{apply_cubic_phase, apply_twisted_phase, Lambda};
use crate::spectral::{GridSpec, SpectralField, Transform};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Lie,
    Strang,
    FilteredStrang,
    ModifiedV1,
    ModifiedV2,
    ModifiedPower,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::Lie,
        SchemeKind::Strang,
        SchemeKind::FilteredStrang,
        SchemeKind::ModifiedV1,
        SchemeKind::ModifiedV2,
        SchemeKind::ModifiedPower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Lie => "lie",
            SchemeKind::Strang => "strang",
            SchemeKind::FilteredStrang => "filtered-strang",
            SchemeKind::ModifiedV1 => "modified-v1",
            SchemeKind::ModifiedV2 => "modified-v2",
            SchemeKind::ModifiedPower => "modified-power",
        }
    }

    /// Whether the scheme filters with a cutoff `N`.
    pub fn uses_cutoff(self) -> bool {
        !matches!(self, SchemeKind::Lie | SchemeKind::Strang)
    }

    /// Cutoff used for step size `tau` on data of regularity `gamma`.
    ///
    /// `None` for the unfiltered schemes.
    pub fn cutoff_for(self, gamma: f64, tau: f64) -> Result<Option<usize>> {
        match self {
            SchemeKind::Lie | SchemeKind::Strang => Ok(None),
            SchemeKind::FilteredStrang => filtered_cutoff(tau).map(Some),
            _ => choose_cutoff(gamma, tau).map(Some),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown scheme {s:?}; expected one of lie, strang, filtered-strang, \
                     modified-v1, modified-v2, modified-power"
                ))
            })
    }
}

/// Scalar phase rate applied to the high-frequency block of the modified schemes.
///
/// With coefficients normalised as `u_k = (1/2pi) \int e^{-ikx} u dx` and
/// `M0 = sum |u_k|^2`, the resonant part of `|u|^2 u` acting on a high mode is
/// `2 M0 u_k`. [`HighPhase::Resonant`] uses that rate: `e^{-2 i lambda M0 tau}` on
/// `Q u` in `modified-v1` and `e^{-i lambda M0 tau}` before the twisted flow in
/// `modified-v2` (which contributes the other `M0`).
///
/// [`HighPhase::Literal`] uses the constants as they are usually printed for
/// these schemes, `4 pi` and `2 pi`. They carry an extra factor `2 pi` relative
/// to the resonant rate, so the high modes pick up a phase error of order
/// `M0 T` and the convergence rate drops to that of the bare projection error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HighPhase {
    #[default]
    Resonant,
    Literal,
}

impl HighPhase {
    /// Rate `c1` in `e^{-i c1 lambda M0 tau}` for `modified-v1`.
    pub fn split_rate(self) -> f64 {
        match self {
            HighPhase::Resonant => 2.0,
            HighPhase::Literal => 4.0 * PI,
        }
    }

    /// Rate `c2` in `e^{-i c2 lambda M0 tau}` for `modified-v2` (and per unit
    /// of `p mu_n` for `modified-power`).
    pub fn twisted_rate(self) -> f64 {
        self.split_rate() / 2.0
    }
}

impl FromStr for HighPhase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "resonant" => Ok(HighPhase::Resonant),
            "literal" => Ok(HighPhase::Literal),
            other => Err(Error::InvalidConfig(format!(
                "unknown high-phase convention {other:?}; expected resonant or literal"
            ))),
        }
    }
}

impl fmt::Display for HighPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HighPhase::Resonant => "resonant",
            HighPhase::Literal => "literal",
        })
    }
}

/// Everything needed to take one step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub lambda: Lambda,
    pub tau: f64,
    /// Projection cutoff `N`; ignored by `lie` and `strang`.
    pub cutoff: usize,
    /// Nonlinearity power `p`; only read by `modified-power`.
    pub power: u32,
    /// Mass of the initial data, frozen for the whole run.
    pub mass0: f64,
    pub high_phase: HighPhase,
}

impl SchemeSpec {
    pub fn new(kind: SchemeKind, lambda: Lambda, tau: f64) -> Self {
        Self {
            kind,
            lambda,
            tau,
            cutoff: 0,
            power: 1,
            mass0: 0.0,
            high_phase: HighPhase::default(),
        }
    }

    /// Spec for a run from `u0`: cutoff from the scheme's rule, `M0 = mass(u0)`.
    pub fn for_data(
        kind: SchemeKind,
        lambda: Lambda,
        tau: f64,
        gamma: f64,
        u0: &SpectralField,
    ) -> Result<Self> {
        let cutoff = kind.cutoff_for(gamma, tau)?.unwrap_or(0);
        Ok(Self::new(kind, lambda, tau)
            .with_cutoff(cutoff)
            .with_mass0(u0.mass()))
    }

    pub fn with_kind(mut self, kind: SchemeKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_power(mut self, power: u32) -> Self {
        self.power = power;
        self
    }

    pub fn with_mass0(mut self, mass0: f64) -> Self {
        self.mass0 = mass0;
        self
    }

    pub fn with_high_phase(mut self, high_phase: HighPhase) -> Self {
        self.high_phase = high_phase;
        self
    }

    /// Checks these parameters against the grid they will run on.
    pub fn validate(&self, grid: GridSpec) -> Result<()> {
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "step size must be finite and nonnegative, got {}",
                self.tau
            )));
        }
        if !(self.mass0.is_finite() && self.mass0 >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "frozen mass must be finite and nonnegative, got {}",
                self.mass0
            )));
        }
        if self.power == 0 {
            return Err(Error::InvalidConfig("power p must be at least 1".into()));
        }
        if self.kind.uses_cutoff() {
            let product = self.tau * self.cutoff as f64;
            if product > 1.0 {
                return Err(Error::InfeasibleStep {
                    tau: self.tau,
                    cutoff: self.cutoff,
                    product,
                });
            }
            let limit = grid.modes() / 8;
            if self.cutoff > limit {
                return Err(Error::UnderResolved {
                    cutoff: self.cutoff,
                    limit,
                    modes: grid.modes(),
                });
            }
        }
        Ok(())
    }
}

/// Exponent `e(gamma)` of the cutoff law `N = tau^{-e(gamma)}`.
pub fn cutoff_exponent(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(if gamma < 1.0 { 2.0 / (4.0 + gamma) } else { 0.4 })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 2.0 {
        Ok(())
    } else {
        Err(Error::UnsupportedRegularity(gamma))
    }
}

fn floor_cutoff(tau: f64, exponent: f64) -> Result<usize> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step size must be positive, got {tau}"
        )));
    }
    // Exact powers such as (2^-10)^(-2/5) = 16 must not round down to 15.
    let raw = tau.powf(-exponent) * (1.0 + 1e-12);
    let cutoff = (raw.floor() as usize).max(1);
    let product = tau * cutoff as f64;
    if product > 1.0 {
        return Err(Error::InfeasibleStep {
            tau,
            cutoff,
            product,
        });
    }
    Ok(cutoff)
}

/// Cutoff for the modified schemes: `max(1, floor(tau^{-e(gamma)}))`, with
/// `e = 2/(4+gamma)` on `(0, 1)` and `2/5` on `[1, 2]`.
pub fn choose_cutoff(gamma: f64, tau: f64) -> Result<usize> {
    floor_cutoff(tau, cutoff_exponent(gamma)?)
}

/// Cutoff of the filtered Strang baseline: `max(1, floor(tau^{-1/2}))`.
pub fn filtered_cutoff(tau: f64) -> Result<usize> {
    floor_cutoff(tau, 0.5)
}

/// Convergence rate of the modified schemes on `H^gamma` data:
/// `4 gamma / (4 + gamma)` on `(0, 1)`, `2 (1 + gamma) / 5` on `[1, 2]`.
pub fn theoretical_rate(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(if gamma < 1.0 {
        4.0 * gamma / (4.0 + gamma)
    } else {
        2.0 * (1.0 + gamma) / 5.0
    })
}

/// Reusable one-step map with precomputed multipliers and FFT plans.
pub struct Stepper {
    spec: SchemeSpec,
    grid: GridSpec,
    transform: Transform,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    low: Vec<bool>,
    work: Vec<Complex64>,
    aux: Vec<Complex64>,
    last_power_mean: Option<f64>,
}

impl Stepper {
    pub fn new(spec: SchemeSpec, grid: GridSpec) -> Result<Self> {
        spec.validate(grid)?;
        let multipliers = |t: f64| -> Vec<Complex64> {
            (0..grid.modes())
                .map(|i| {
                    let k = grid.wavenumber_at(i) as f64;
                    Complex64::from_polar(1.0, k * k * t)
                })
                .collect()
        };
        let low = (0..grid.modes())
            .map(|i| grid.wavenumber_at(i).unsigned_abs() <= spec.cutoff as u64)
            .collect();
        Ok(Self {
            spec,
            grid,
            transform: Transform::new(grid),
            half: multipliers(spec.tau / 2.0),
            full: multipliers(spec.tau),
            low,
            work: vec![Complex64::new(0.0, 0.0); grid.modes()],
            aux: vec![Complex64::new(0.0, 0.0); grid.modes()],
            last_power_mean: None,
        })
    }

    pub fn spec(&self) -> &SchemeSpec {
        &self.spec
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// `mu_n` used by the most recent `modified-power` step.
    pub fn last_power_mean(&self) -> Option<f64> {
        self.last_power_mean
    }

    /// Advances `u` by one step in place.
    pub fn step(&mut self, u: &mut SpectralField) -> Result<()> {
        self.grid.check_same(&u.grid())?;
        let c = u.storage_mut();
        let theta = self.spec.lambda.sign() * self.spec.tau;
        match self.spec.kind {
            SchemeKind::Lie => {
                self.transform.to_physical_in_place(c);
                apply_cubic_phase(c, theta);
                self.transform.to_spectral_in_place(c);
                mul_assign(c, &self.full);
            }
            SchemeKind::Strang => {
                mul_assign(c, &self.half);
                self.transform.to_physical_in_place(c);
                apply_cubic_phase(c, theta);
                self.transform.to_spectral_in_place(c);
                mul_assign(c, &self.half);
            }
            SchemeKind::FilteredStrang => {
                self.filtered_half(c);
                self.transform.to_physical_in_place(c);
                apply_cubic_phase(c, theta);
                self.transform.to_spectral_in_place(c);
                self.filtered_half(c);
            }
            SchemeKind::ModifiedV1 => {
                let rate = self.spec.high_phase.split_rate();
                let high_phase =
                    Complex64::from_polar(1.0, -rate * theta * self.spec.mass0);
                // work: high branch; c: low branch.
                for i in 0..c.len() {
                    self.work[i] = if self.low[i] {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c[i] * self.full[i] * high_phase
                    };
                }
                self.filtered_half(c);
                self.transform.to_physical_in_place(c);
                apply_cubic_phase(c, theta);
                self.transform.to_spectral_in_place(c);
                self.filtered_half(c);
                for (ci, wi) in c.iter_mut().zip(&self.work) {
                    *ci += wi;
                }
            }
            SchemeKind::ModifiedV2 => {
                let rate = self.spec.high_phase.twisted_rate();
                let high_phase =
                    Complex64::from_polar(1.0, -rate * theta * self.spec.mass0);
                self.twisted_step(c, high_phase, theta, 1);
            }
            SchemeKind::ModifiedPower => {
                let p = self.spec.power;
                self.aux.copy_from_slice(c);
                self.transform.to_physical_in_place(&mut self.aux);
                let mu = self
                    .aux
                    .iter()
                    .map(|s| s.norm_sqr().powi(p as i32))
                    .sum::<f64>()
                    / self.grid.modes() as f64;
                self.last_power_mean = Some(mu);
                let rate = self.spec.high_phase.twisted_rate();
                let high_phase =
                    Complex64::from_polar(1.0, -rate * theta * p as f64 * mu);
                self.twisted_step(c, high_phase, theta, p);
            }
        }
        Ok(())
    }

    /// `c <- P E(tau/2) c`.
    fn filtered_half(&self, c: &mut [Complex64]) {
        for ((ci, &m), &low) in c.iter_mut().zip(&self.half).zip(&self.low) {
            *ci = if low { *ci * m } else { Complex64::new(0.0, 0.0) };
        }
    }

    /// `c <- E(tau/2) Psi_tau E(tau/2) (P + high_phase Q) c`.
    fn twisted_step(&mut self, c: &mut [Complex64], high_phase: Complex64, theta: f64, p: u32) {
        for i in 0..c.len() {
            let w = if self.low[i] {
                c[i] * self.half[i]
            } else {
                c[i] * self.half[i] * high_phase
            };
            c[i] = w;
            self.aux[i] = if self.low[i] { w } else { Complex64::new(0.0, 0.0) };
        }
        self.transform.to_physical_in_place(&mut self.aux);
        self.transform.to_physical_in_place(c);
        apply_twisted_phase(c, &self.aux, theta, p);
        self.transform.to_spectral_in_place(c);
        mul_assign(c, &self.half);
    }
}

fn mul_assign(c: &mut [Complex64], m: &[Complex64]) {
    for (ci, mi) in c.iter_mut().zip(m) {
        *ci *= mi;
    }
}

/// One step of the scheme named by `spec.kind`.
pub fn step(u: &SpectralField, spec: &SchemeSpec) -> Result<SpectralField> {
    let mut stepper = Stepper::new(*spec, u.grid())?;
    let mut out = u.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

pub fn step_lie(u: &SpectralField, spec: &SchemeSpec) -> Result<SpectralField> {
    step(u, &spec.with_kind(SchemeKind::Lie))
}

pub fn step_strang(u: &SpectralField, spec: &SchemeSpec) -> Result<SpectralField> {
    step(u, &spec.with_kind(SchemeKind::Strang))
}

pub fn step_filtered_strang(u: &SpectralField, spec: &SchemeSpec) -> Result<SpectralField> {
    step(u, &spec.with_kind(SchemeKind::FilteredStrang))
}

pub fn step_modified_v1(u: &SpectralField, spec: &SchemeSpec) -> Result<SpectralField> {
    step(u, &spec.with_kind(SchemeKind::ModifiedV1))
}

pub fn step_modified_v2(u: &SpectralField, spec: &SchemeSpec) -> Result<SpectralField> {
    step(u, &spec.with_kind(SchemeKind::ModifiedV2))
}

pub fn step_modified_power(u: &SpectralField, spec: &SchemeSpec) -> Result<SpectralField> {
    step(u, &spec.with_kind(SchemeKind::ModifiedPower))
}

/// Per-step callback: `(n, t_n, u^n)`, called after each step.
pub type Observer<'a> = &'a mut dyn FnMut(usize, f64, &SpectralField);

/// Takes `steps` steps from `u0`. Aborts with [`Error::NonFinite`] as soon as a
/// step produces a non-finite coefficient.
pub fn evolve(
    u0: &SpectralField,
    spec: &SchemeSpec,
    steps: usize,
    observer: Option<Observer<'_>>,
) -> Result<SpectralField> {
    let mut stepper = Stepper::new(*spec, u0.grid())?;
    evolve_with(&mut stepper, u0, steps, observer)
}

/// As [`evolve`], reusing an existing stepper.
pub fn evolve_with(
    stepper: &mut Stepper,
    u0: &SpectralField,
    steps: usize,
    mut observer: Option<Observer<'_>>,
) -> Result<SpectralField> {
    let tau = stepper.spec().tau;
    let mut u = u0.clone();
    for n in 1..=steps {
        stepper.step(&mut u)?;
        let t = n as f64 * tau;
        if !u.is_finite() {
            return Err(Error::NonFinite { step: n, time: t });
        }
        if let Some(obs) = observer.as_mut() {
            obs(n, t, &u);
        }
    }
    Ok(u)
}
