//! Deterministic initial data.
//!
//! Random coefficients come from a counter-based generator: the two normals of
//! mode `k` are a pure function of `(seed, k)`, independent of the grid size and
//! of evaluation order. The recipe, for reimplementation elsewhere:
//!
//! ```text
//! splitmix64(x):  z = x + 0x9E3779B97F4A7C15
//!                 z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!                 return z ^ (z >> 31)                      (wrapping u64 arithmetic)
//! key          = splitmix64(seed)
//! zz(k)        = 2k for k >= 0, -2k - 1 for k < 0
//! bits(k, j)   = splitmix64(key ^ splitmix64(4 zz(k) + j)),  j = 0, 1
//! uniform(b)   = ((b >> 11) + 1) * 2^-53                    in (0, 1]
//! r = sqrt(-2 ln uniform(bits(k,0))),  phi = 2 pi uniform(bits(k,1))
//! zeta_k = (r cos phi + i r sin phi) / sqrt(2)
//! ```

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::Lambda;
use crate::spectral::{bracket, GridSpec, SpectralField};

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn zigzag(k: i64) -> u64 {
    if k >= 0 {
        2 * k as u64
    } else {
        2 * k.unsigned_abs() - 1
    }
}

fn unit_interval(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Counter-based source of standard complex normals keyed by wavenumber.
#[derive(Clone, Copy, Debug)]
pub struct ModeNoise {
    key: u64,
}

impl ModeNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            key: splitmix64(seed),
        }
    }

    fn bits(&self, k: i64, j: u64) -> u64 {
        splitmix64(self.key ^ splitmix64(4 * zigzag(k) + j))
    }

    /// `zeta_k = (a + i b) / sqrt(2)` with `a, b` independent standard normals.
    pub fn complex_normal(&self, k: i64) -> Complex64 {
        let r = (-2.0 * unit_interval(self.bits(k, 0)).ln()).sqrt();
        let phi = 2.0 * PI * unit_interval(self.bits(k, 1));
        Complex64::from_polar(r, phi) / SQRT_2
    }
}

/// Random data of prescribed Sobolev regularity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughDataSpec {
    pub gamma: f64,
    pub seed: u64,
    pub modes: usize,
    /// Extra decay beyond `gamma + 1/2`.
    pub decay_margin: f64,
}

impl RoughDataSpec {
    pub fn new(gamma: f64, seed: u64, modes: usize) -> Self {
        Self {
            gamma,
            seed,
            modes,
            decay_margin: 0.01,
        }
    }
}

/// `u_k = <k>^{-gamma - 1/2 - margin} zeta_k` for `|k| <= M/4`, zero beyond,
/// rescaled to unit `H^gamma` norm.
///
/// Such data lies in `H^gamma` but in no `H^{gamma + delta}` with
/// `delta > margin` (in the limit of infinite resolution).
pub fn rough_field(spec: &RoughDataSpec) -> Result<SpectralField> {
    if !(spec.gamma.is_finite() && spec.gamma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "regularity must be finite and nonnegative, got {}",
            spec.gamma
        )));
    }
    if !(spec.decay_margin.is_finite() && spec.decay_margin >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "decay margin must be finite and nonnegative, got {}",
            spec.decay_margin
        )));
    }
    let grid = GridSpec::new(spec.modes)?;
    let band = (spec.modes / 4) as i64;
    let decay = spec.gamma + 0.5 + spec.decay_margin;
    let noise = ModeNoise::new(spec.seed);
    let field = SpectralField::from_fn(grid, |k| {
        if k.abs() <= band {
            noise.complex_normal(k) * bracket(k).powf(-decay)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;
    let norm = field.sobolev_norm(spec.gamma);
    Ok(field.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Single Fourier mode `amplitude e^{imx}`.
pub fn plane_wave(amplitude: Complex64, m: i64, grid: GridSpec) -> Result<SpectralField> {
    if m.unsigned_abs() >= (grid.modes() / 2) as u64 {
        return Err(Error::OutOfBand {
            wavenumber: m,
            modes: grid.modes(),
        });
    }
    let mut f = SpectralField::zeros(grid);
    f.set_coeff(m, amplitude)?;
    Ok(f)
}

/// Exact solution from a plane wave: `A e^{imx} e^{i(m^2 - lambda |A|^2) t}`.
pub fn plane_wave_solution(
    amplitude: Complex64,
    m: i64,
    grid: GridSpec,
    lambda: Lambda,
    t: f64,
) -> Result<SpectralField> {
    let omega = (m * m) as f64 - lambda.sign() * amplitude.norm_sqr();
    plane_wave(amplitude * Complex64::from_polar(1.0, omega * t), m, grid)
}

/// Smooth profile `u_k = (-1)^k <k>^{-6}` on `|k| <= M/4`, unit `H^2` norm.
pub fn smooth_field(grid: GridSpec) -> Result<SpectralField> {
    let band = (grid.modes() / 4) as i64;
    let field = SpectralField::from_fn(grid, |k| {
        if k.abs() <= band {
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign * bracket(k).powi(-6), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;
    let norm = field.sobolev_norm(2.0);
    Ok(field.scale(Complex64::new(1.0 / norm, 0.0)))
}
