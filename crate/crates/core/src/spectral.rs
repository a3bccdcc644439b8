//! Fourier-space representation of periodic fields on the torus (-pi, pi).
//!
//! A [`SpectralField`] stores the coefficients `u_k` of
//!
//! ```text
//! u(x) = sum_k u_k e^{ikx},        u_k = (1/2pi) \int e^{-ikx} u(x) dx,
//! ```
//!
//! for the symmetric wavenumber range `k = -M/2 ..= M/2 - 1`. The discrete
//! forward transform carries the `1/M` factor, so coefficients coincide with
//! the continuous ones for band-limited functions, and
//! `mass = sum_k |u_k|^2 = (1/2pi) \int |u|^2 dx`.
//!
//! # Sign convention of the linear flow
//!
//! The model equation is `i u_t = u_xx + lambda |u|^2 u`. Its linear part acts on
//! each Fourier mode as `d/dt u_k = i k^2 u_k`, so [`SpectralField::free_flow`]
//! multiplies mode `k` by `e^{+i k^2 t}`. Every integrator in this crate uses that
//! operator wherever the linear flow `e^{it d_xx}` appears.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Spatial resolution `M` of the collocation grid on `(-pi, pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    modes: usize,
}

impl GridSpec {
    pub fn new(modes: usize) -> Result<Self> {
        if modes < 2 || !modes.is_power_of_two() {
            return Err(Error::InvalidResolution(modes));
        }
        Ok(Self { modes })
    }

    /// Number of modes (and collocation points) `M`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Smallest carried wavenumber, `-M/2` (the Nyquist mode).
    pub fn min_wavenumber(&self) -> i64 {
        -(self.modes as i64 / 2)
    }

    /// Largest carried wavenumber, `M/2 - 1`.
    pub fn max_wavenumber(&self) -> i64 {
        self.modes as i64 / 2 - 1
    }

    /// Wavenumbers in increasing order.
    pub fn wavenumbers(&self) -> impl Iterator<Item = i64> {
        self.min_wavenumber()..=self.max_wavenumber()
    }

    /// Collocation points `x_j = -pi + 2 pi j / M`.
    pub fn points(&self) -> Vec<f64> {
        let h = 2.0 * PI / self.modes as f64;
        (0..self.modes).map(|j| -PI + h * j as f64).collect()
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.min_wavenumber()..=self.max_wavenumber()).contains(&k)
    }

    /// Storage slot of wavenumber `k` (FFT order: `0, 1, .., M/2-1, -M/2, .., -1`).
    pub fn slot(&self, k: i64) -> Option<usize> {
        self.contains(k)
            .then(|| k.rem_euclid(self.modes as i64) as usize)
    }

    /// Wavenumber stored in slot `i`.
    pub fn wavenumber_at(&self, i: usize) -> i64 {
        if i < self.modes / 2 {
            i as i64
        } else {
            i as i64 - self.modes as i64
        }
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::GridMismatch {
                left: self.modes,
                right: other.modes,
            });
        }
        Ok(())
    }
}

/// Builds a grid of `modes` points; `modes` must be a power of two, at least 2.
pub fn make_grid(modes: usize) -> Result<GridSpec> {
    GridSpec::new(modes)
}

/// Regularity exponent `s` of the Sobolev space `H^s`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SobolevIndex(pub f64);

impl From<f64> for SobolevIndex {
    fn from(s: f64) -> Self {
        SobolevIndex(s)
    }
}

/// Japanese bracket `<k> = (1 + k^2)^{1/2}`.
pub fn bracket(k: i64) -> f64 {
    (1.0 + (k * k) as f64).sqrt()
}

/// Complex Fourier coefficients of a periodic function on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.modes()],
        }
    }

    /// Wraps coefficients given in storage (FFT) order.
    pub fn from_storage(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.modes() {
            return Err(Error::InvalidResolution(coeffs.len()));
        }
        let field = Self { grid, coeffs };
        field.check_finite()?;
        Ok(field)
    }

    /// Builds a field from a coefficient function of the wavenumber.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        let coeffs = (0..grid.modes()).map(|i| f(grid.wavenumber_at(i))).collect();
        Self::from_storage(grid, coeffs)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Coefficients in storage (FFT) order.
    pub fn storage(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn storage_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of wavenumber `k`; zero outside the carried band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid
            .slot(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: i64, value: Complex64) -> Result<()> {
        let i = self.grid.slot(k).ok_or(Error::OutOfBand {
            wavenumber: k,
            modes: self.grid.modes(),
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// `(k, u_k)` pairs in increasing wavenumber order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.grid.wavenumbers().map(move |k| (k, self.coeff(k)))
    }

    /// `(k, u_k)` pairs in storage order.
    pub fn storage_modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.grid.wavenumber_at(i), c))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self
            .storage_modes()
            .find(|(_, c)| !(c.re.is_finite() && c.im.is_finite()))
        {
            Some((k, _)) => Err(Error::NonFiniteCoefficient { wavenumber: k }),
            None => Ok(()),
        }
    }

    /// Low-frequency projection: keeps `|k| <= cutoff`, zeroes the rest.
    pub fn project_low(&self, cutoff: usize) -> Self {
        let mut out = self.clone();
        let grid = self.grid;
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if grid.wavenumber_at(i).unsigned_abs() > cutoff as u64 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// High-frequency projection: keeps `|k| > cutoff`, the complement of
    /// [`project_low`](Self::project_low).
    pub fn project_high(&self, cutoff: usize) -> Self {
        let mut out = self.clone();
        let grid = self.grid;
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if grid.wavenumber_at(i).unsigned_abs() <= cutoff as u64 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Exact linear flow over time `t`: `u_k -> e^{i k^2 t} u_k`.
    pub fn free_flow(&self, t: f64) -> Self {
        let mut out = self.clone();
        if t != 0.0 {
            let grid = self.grid;
            for (i, c) in out.coeffs.iter_mut().enumerate() {
                let k = grid.wavenumber_at(i) as f64;
                *c *= Complex64::from_polar(1.0, k * k * t);
            }
        }
        out
    }

    /// `sum_k |u_k|^2`, equal to `(1/2pi) \int |u|^2 dx`.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `L^2` norm `(2 pi sum_k |u_k|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * PI * self.mass()).sqrt()
    }

    /// `H^s` norm `(2 pi sum_k <k>^{2s} |u_k|^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: impl Into<SobolevIndex>) -> f64 {
        let s = s.into().0;
        let sum: f64 = self
            .storage_modes()
            .map(|(k, c)| (1.0 + (k * k) as f64).powf(s) * c.norm_sqr())
            .sum();
        (2.0 * PI * sum).sqrt()
    }

    /// Spatial mean `(1/2pi) \int u dx`, i.e. the zero mode.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `L^2(T)` inner product `\int f conj(g) dx = 2 pi sum_k f_k conj(g_k)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * 2.0 * PI)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Translates the field by `shift` in physical space: `u(x) -> u(x - shift)`.
    pub fn translate(&self, shift: f64) -> Self {
        let mut out = self.clone();
        let grid = self.grid;
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = grid.wavenumber_at(i) as f64;
            *c *= Complex64::from_polar(1.0, -k * shift);
        }
        out
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        with_transform(self.grid, |t| {
            let mut out = vec![Complex64::new(0.0, 0.0); self.grid.modes()];
            t.to_physical(&self.coeffs, &mut out);
            out
        })
    }
}

impl fmt::Display for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpectralField(M={}, mass={:e})", self.grid.modes(), self.mass())
    }
}

/// Samples `u(x_j) = sum_k u_k e^{i k x_j}` on the collocation grid.
pub fn to_physical(field: &SpectralField) -> Vec<Complex64> {
    field.to_physical()
}

/// Coefficients `u_k = (1/M) sum_j s_j e^{-i k x_j}` of grid samples.
pub fn to_spectral(samples: &[Complex64]) -> Result<SpectralField> {
    let grid = GridSpec::new(samples.len())?;
    let mut coeffs = samples.to_vec();
    with_transform(grid, |t| t.to_spectral_in_place(&mut coeffs));
    SpectralField::from_storage(grid, coeffs)
}

/// FFT plans and scratch space for one grid size.
///
/// A `Transform` is owned by a single worker; the free functions
/// [`to_physical`] and [`to_spectral`] keep one per thread.
pub struct Transform {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Transform {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.modes());
        let inverse = planner.plan_fft_inverse(grid.modes());
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            grid,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Coefficients (storage order) to samples.
    ///
    /// `e^{i k x_j} = (-1)^k e^{2 pi i k j / M}`, and slot parity equals
    /// wavenumber parity because `M` is even.
    pub fn to_physical(&mut self, coeffs: &[Complex64], out: &mut [Complex64]) {
        for (i, (o, &c)) in out.iter_mut().zip(coeffs).enumerate() {
            *o = if i & 1 == 0 { c } else { -c };
        }
        self.inverse.process_with_scratch(out, &mut self.scratch);
    }

    pub fn to_physical_in_place(&mut self, buf: &mut [Complex64]) {
        for c in buf.iter_mut().skip(1).step_by(2) {
            *c = -*c;
        }
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }

    /// Samples to coefficients (storage order), in place.
    pub fn to_spectral_in_place(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
        let inv = 1.0 / self.grid.modes() as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            *c *= if i & 1 == 0 { inv } else { -inv };
        }
    }
}

thread_local! {
    static TRANSFORMS: RefCell<HashMap<usize, Transform>> = RefCell::new(HashMap::new());
}

fn with_transform<R>(grid: GridSpec, f: impl FnOnce(&mut Transform) -> R) -> R {
    TRANSFORMS.with(|cell| {
        let mut map = cell.borrow_mut();
        let t = map
            .entry(grid.modes())
            .or_insert_with(|| Transform::new(grid));
        f(t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: usize) -> GridSpec {
        GridSpec::new(m).unwrap()
    }

    #[test]
    fn wavenumber_sets() {
        assert_eq!(grid(8).wavenumbers().collect::<Vec<_>>(), (-4..=3).collect::<Vec<_>>());
        assert_eq!(grid(2).wavenumbers().collect::<Vec<_>>(), vec![-1, 0]);
        assert!(matches!(GridSpec::new(6), Err(Error::InvalidResolution(6))));
        assert!(GridSpec::new(1).is_err());
        assert!(GridSpec::new(0).is_err());
    }

    #[test]
    fn slots_round_trip() {
        let g = grid(16);
        for k in g.wavenumbers() {
            assert_eq!(g.wavenumber_at(g.slot(k).unwrap()), k);
        }
        assert_eq!(g.slot(8), None);
        assert_eq!(g.slot(-9), None);
    }

    #[test]
    fn points_cover_torus() {
        let x = grid(4).points();
        assert_eq!(x[0], -PI);
        assert!((x[2] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn constant_mode_is_constant() {
        let mut f = SpectralField::zeros(grid(8));
        f.set_coeff(0, Complex64::new(1.0, 0.0)).unwrap();
        for s in f.to_physical() {
            assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn set_coeff_out_of_band() {
        let mut f = SpectralField::zeros(grid(8));
        assert!(f.set_coeff(4, Complex64::new(1.0, 0.0)).is_err());
        assert_eq!(f.coeff(100), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let mut c = vec![Complex64::new(0.0, 0.0); 4];
        c[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            SpectralField::from_storage(grid(4), c),
            Err(Error::NonFiniteCoefficient { wavenumber: -1 })
        ));
    }

    #[test]
    fn to_spectral_rejects_bad_length() {
        assert!(to_spectral(&[Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn projection_at_cutoff_is_inclusive() {
        let f = SpectralField::from_fn(grid(16), |_| Complex64::new(1.0, 0.0)).unwrap();
        let low = f.project_low(2);
        assert_eq!(low.coeff(2), Complex64::new(1.0, 0.0));
        assert_eq!(low.coeff(-2), Complex64::new(1.0, 0.0));
        assert_eq!(low.coeff(3), Complex64::new(0.0, 0.0));
        assert_eq!(f.project_high(2).coeff(2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sobolev_norm_values() {
        let mut f = SpectralField::zeros(grid(8));
        f.set_coeff(0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((f.sobolev_norm(3.7) - (2.0 * PI).sqrt()).abs() < 1e-14);
        let mut g = SpectralField::zeros(grid(8));
        g.set_coeff(1, Complex64::new(1.0, 0.0)).unwrap();
        assert!((g.sobolev_norm(1.0) - (4.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn translate_by_grid_point_shifts_samples() {
        let g = grid(16);
        let f = SpectralField::from_fn(g, |k| Complex64::new(1.0 / (1 + k * k) as f64, k as f64 * 0.1))
            .unwrap();
        let h = 2.0 * PI / 16.0;
        let shifted = f.translate(h).to_physical();
        let orig = f.to_physical();
        for j in 0..16 {
            assert!((shifted[(j + 1) % 16] - orig[j]).norm() < 1e-14);
        }
    }
}
