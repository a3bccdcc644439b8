//! Exact nonlinear sub-flows, evaluated pointwise on the collocation grid.
//!
//! * [`nonlinear_flow`]: `phi -> e^{-i lambda t |phi|^2} phi`, the exact solution
//!   of `i u_t = lambda |u|^2 u`.
//! * [`modified_flow`]: `phi -> e^{-i lambda t |P phi|^2} phi` where `P` keeps the
//!   modes `|k| <= N`; the phase sees only the low-pass part but is applied to
//!   the whole field.
//! * [`power_flow`]: as above with the phase `|P phi|^{2p}`.
//!
//! No dealiasing is performed. Callers keep `M >= 8 N` so aliasing stays well
//! below the time discretisation error.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{to_spectral, SpectralField};

/// Sign of the cubic term: `+1` focusing, `-1` defocusing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lambda {
    Focusing,
    Defocusing,
}

impl Lambda {
    pub fn sign(self) -> f64 {
        match self {
            Lambda::Focusing => 1.0,
            Lambda::Defocusing => -1.0,
        }
    }

    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            1 => Ok(Lambda::Focusing),
            -1 => Ok(Lambda::Defocusing),
            other => Err(Error::InvalidConfig(format!(
                "lambda must be +1 or -1, got {other}"
            ))),
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lambda::Focusing => "+1",
            Lambda::Defocusing => "-1",
        })
    }
}

impl FromStr for Lambda {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "+1" | "focusing" => Ok(Lambda::Focusing),
            "-1" | "defocusing" => Ok(Lambda::Defocusing),
            other => Err(Error::InvalidConfig(format!(
                "lambda must be +1 or -1, got {other:?}"
            ))),
        }
    }
}

/// Parameters shared by the three flows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams {
    pub lambda: Lambda,
    pub t: f64,
    /// Low-pass cutoff `N` for the twisted flows.
    pub cutoff: usize,
    /// Power `p >= 1` of the power flow.
    pub power: u32,
}

impl FlowParams {
    pub fn new(lambda: Lambda, t: f64) -> Self {
        Self {
            lambda,
            t,
            cutoff: 0,
            power: 1,
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_power(mut self, power: u32) -> Self {
        self.power = power;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::InvalidConfig(format!("flow time {} is not finite", self.t)));
        }
        if self.power == 0 {
            return Err(Error::InvalidConfig("power p must be at least 1".into()));
        }
        Ok(())
    }
}

/// `s_j <- e^{-i theta |s_j|^2} s_j` with `theta = lambda t`.
pub(crate) fn apply_cubic_phase(samples: &mut [Complex64], theta: f64) {
    for s in samples.iter_mut() {
        *s *= Complex64::from_polar(1.0, -theta * s.norm_sqr());
    }
}

/// `s_j <- e^{-i theta |l_j|^{2p}} s_j` with `theta = lambda t`.
pub(crate) fn apply_twisted_phase(
    samples: &mut [Complex64],
    low: &[Complex64],
    theta: f64,
    power: u32,
) {
    if power == 1 {
        for (s, l) in samples.iter_mut().zip(low) {
            *s *= Complex64::from_polar(1.0, -theta * l.norm_sqr());
        }
    } else {
        for (s, l) in samples.iter_mut().zip(low) {
            *s *= Complex64::from_polar(1.0, -theta * l.norm_sqr().powi(power as i32));
        }
    }
}

/// `phi -> e^{-i lambda t |phi|^2} phi`.
pub fn nonlinear_flow(phi: &SpectralField, params: &FlowParams) -> Result<SpectralField> {
    params.validate()?;
    let mut samples = phi.to_physical();
    apply_cubic_phase(&mut samples, params.lambda.sign() * params.t);
    to_spectral(&samples)
}

/// `phi -> e^{-i lambda t |P_N phi|^2} phi`.
pub fn modified_flow(phi: &SpectralField, params: &FlowParams) -> Result<SpectralField> {
    power_flow(phi, &params.with_power(1))
}

/// `phi -> e^{-i lambda t |P_N phi|^{2p}} phi`.
pub fn power_flow(phi: &SpectralField, params: &FlowParams) -> Result<SpectralField> {
    params.validate()?;
    let low = phi.project_low(params.cutoff).to_physical();
    let mut samples = phi.to_physical();
    apply_twisted_phase(
        &mut samples,
        &low,
        params.lambda.sign() * params.t,
        params.power,
    );
    to_spectral(&samples)
}
