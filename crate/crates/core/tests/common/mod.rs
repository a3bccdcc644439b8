//! Independent oracles shared by the integration and acceptance tests.
//!
//! Everything here works on plain coefficient vectors indexed by `k + M/2`
//! (increasing wavenumber) and uses O(M^2) direct sums, no FFT library.

#![allow(dead_code)]

use std::f64::consts::PI;

use nlsplit::spectral::{GridSpec, SpectralField};
use num_complex::Complex64 as C;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn wavenumber(m: usize, idx: usize) -> i64 {
    idx as i64 - (m / 2) as i64
}

pub fn point(m: usize, j: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / m as f64
}

pub fn to_vec(f: &SpectralField) -> Vec<C> {
    f.grid().wavenumbers().map(|k| f.coeff(k)).collect()
}

pub fn from_vec(grid: GridSpec, v: &[C]) -> SpectralField {
    let half = (grid.modes() / 2) as i64;
    SpectralField::from_fn(grid, |k| v[(k + half) as usize]).unwrap()
}

/// `samples_j = sum_k c_k e^{i k x_j}`.
pub fn direct_physical(coeffs: &[C]) -> Vec<C> {
    let m = coeffs.len();
    (0..m)
        .map(|j| {
            let x = point(m, j);
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &ck)| ck * C::from_polar(1.0, wavenumber(m, i) as f64 * x))
                .sum()
        })
        .collect()
}

/// `c_k = (1/M) sum_j s_j e^{-i k x_j}`.
pub fn direct_spectral(samples: &[C]) -> Vec<C> {
    let m = samples.len();
    (0..m)
        .map(|i| {
            let k = wavenumber(m, i) as f64;
            samples
                .iter()
                .enumerate()
                .map(|(j, &s)| s * C::from_polar(1.0, -k * point(m, j)))
                .sum::<C>()
                / m as f64
        })
        .collect()
}

pub fn norm_l2(v: &[C]) -> f64 {
    (2.0 * PI * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

pub fn dist_l2(a: &[C], b: &[C]) -> f64 {
    (2.0 * PI * a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()).sqrt()
}

pub fn mass(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn free(v: &[C], t: f64) -> Vec<C> {
    let m = v.len();
    v.iter()
        .enumerate()
        .map(|(i, &z)| {
            let k = wavenumber(m, i) as f64;
            z * C::from_polar(1.0, k * k * t)
        })
        .collect()
}

pub fn low(v: &[C], n: usize) -> Vec<C> {
    let m = v.len();
    v.iter()
        .enumerate()
        .map(|(i, &z)| {
            if wavenumber(m, i).unsigned_abs() as usize <= n {
                z
            } else {
                C::new(0.0, 0.0)
            }
        })
        .collect()
}

pub fn high(v: &[C], n: usize) -> Vec<C> {
    let l = low(v, n);
    v.iter().zip(&l).map(|(a, b)| a - b).collect()
}

/// `e^{-i lambda t |u|^2} u` pointwise.
pub fn cubic(v: &[C], lambda: f64, t: f64) -> Vec<C> {
    let s: Vec<C> = direct_physical(v)
        .into_iter()
        .map(|z| z * C::from_polar(1.0, -lambda * t * z.norm_sqr()))
        .collect();
    direct_spectral(&s)
}

/// `e^{-i lambda t |P_N u|^{2p}} u` pointwise.
pub fn twisted(v: &[C], n: usize, lambda: f64, t: f64, p: i32) -> Vec<C> {
    let s = direct_physical(v);
    let l = direct_physical(&low(v, n));
    let out: Vec<C> = s
        .iter()
        .zip(&l)
        .map(|(&z, w)| z * C::from_polar(1.0, -lambda * t * w.norm_sqr().powi(p)))
        .collect();
    direct_spectral(&out)
}

/// Scheme parameters for the direct oracle. `split_rate` and `twisted_rate`
/// multiply `lambda M0 tau` in the high-frequency phases of v1 and v2.
#[derive(Clone, Copy, Debug)]
pub struct OracleSpec {
    pub lambda: f64,
    pub tau: f64,
    pub cutoff: usize,
    pub power: i32,
    pub mass0: f64,
    pub split_rate: f64,
    pub twisted_rate: f64,
}

pub fn oracle_lie(u: &[C], s: &OracleSpec) -> Vec<C> {
    free(&cubic(u, s.lambda, s.tau), s.tau)
}

pub fn oracle_strang(u: &[C], s: &OracleSpec) -> Vec<C> {
    let h = s.tau / 2.0;
    free(&cubic(&free(u, h), s.lambda, s.tau), h)
}

pub fn oracle_filtered(u: &[C], s: &OracleSpec) -> Vec<C> {
    let h = s.tau / 2.0;
    let w = free(&low(u, s.cutoff), h);
    low(&free(&cubic(&w, s.lambda, s.tau), h), s.cutoff)
}

pub fn oracle_v1(u: &[C], s: &OracleSpec) -> Vec<C> {
    let phase = C::from_polar(1.0, -s.split_rate * s.lambda * s.mass0 * s.tau);
    let hi: Vec<C> = high(&free(u, s.tau), s.cutoff).iter().map(|z| z * phase).collect();
    let lo = oracle_filtered(u, s);
    hi.iter().zip(&lo).map(|(a, b)| a + b).collect()
}

fn twisted_composition(u: &[C], s: &OracleSpec, phase: C) -> Vec<C> {
    let h = s.tau / 2.0;
    let lo = low(u, s.cutoff);
    let hi = high(u, s.cutoff);
    let mixed: Vec<C> = lo.iter().zip(&hi).map(|(a, b)| a + b * phase).collect();
    free(&twisted(&free(&mixed, h), s.cutoff, s.lambda, s.tau, s.power), h)
}

pub fn oracle_v2(u: &[C], s: &OracleSpec) -> Vec<C> {
    let phase = C::from_polar(1.0, -s.twisted_rate * s.lambda * s.mass0 * s.tau);
    twisted_composition(u, &OracleSpec { power: 1, ..*s }, phase)
}

pub fn oracle_power(u: &[C], s: &OracleSpec) -> Vec<C> {
    let samples = direct_physical(u);
    let mu = samples.iter().map(|z| z.norm_sqr().powi(s.power)).sum::<f64>() / u.len() as f64;
    let phase = C::from_polar(1.0, -s.twisted_rate * s.lambda * s.power as f64 * mu * s.tau);
    twisted_composition(u, s, phase)
}

/// Right-hand side of the collocation system `c' = i k^2 c - i lambda F[|u|^2 u]`.
pub fn nls_rhs(v: &[C], lambda: f64) -> Vec<C> {
    let m = v.len();
    let cubed: Vec<C> = direct_physical(v)
        .into_iter()
        .map(|z| z * z.norm_sqr())
        .collect();
    let nl = direct_spectral(&cubed);
    (0..m)
        .map(|i| {
            let k = wavenumber(m, i) as f64;
            C::i() * (k * k) * v[i] - C::i() * lambda * nl[i]
        })
        .collect()
}

fn axpy(y: &[C], terms: &[(f64, &[C])], h: f64) -> Vec<C> {
    let mut out = y.to_vec();
    for &(a, k) in terms {
        if a != 0.0 {
            for (o, &ki) in out.iter_mut().zip(k) {
                *o += ki * (h * a);
            }
        }
    }
    out
}

/// Adaptive Dormand-Prince 5(4) integration of `y' = f(y)` over `[0, t]` with
/// mixed absolute/relative tolerance `tol` per component.
pub fn dopri5(f: impl Fn(&[C]) -> Vec<C>, y0: &[C], t: f64, tol: f64) -> Vec<C> {
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // fifth-order minus embedded fourth-order weights
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let mut y = y0.to_vec();
    let mut time = 0.0;
    let mut h = (t / 100.0).min(1e-3);
    let mut k1 = f(&y);
    while time < t {
        if time + h > t {
            h = t - time;
        }
        let k2 = f(&axpy(&y, &[(A21, &k1)], h));
        let k3 = f(&axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(&axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(&axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = f(&axpy(
            &y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            h,
        ));
        let y_new = axpy(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            h,
        );
        let k7 = f(&y_new);
        let mut err = 0.0f64;
        for i in 0..y.len() {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = tol * (1.0 + y[i].norm().max(y_new[i].norm()));
            err = err.max(e.norm() / scale);
        }
        if err <= 1.0 {
            time += h;
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    y
}

/// Solution of the collocation system at time `t`.
pub fn ode_oracle(v: &[C], lambda: f64, t: f64, tol: f64) -> Vec<C> {
    dopri5(|y| nls_rhs(y, lambda), v, t, tol)
}

/// Least-squares slope of `log2 y` against `log2 x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
