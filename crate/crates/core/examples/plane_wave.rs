//! A plane wave `A e^{imx}` solves the equation exactly with frequency
//! `m^2 - lambda |A|^2`. Every scheme except Lie reproduces it to round-off.
//!
//! ```text
//! cargo run --example plane_wave
//! ```

use nlsplit::datagen::{plane_wave, plane_wave_solution};
use nlsplit::flows::Lambda;
use nlsplit::integrators::{evolve, SchemeKind, SchemeSpec};
use nlsplit::spectral::make_grid;
use num_complex::Complex64;

fn main() -> nlsplit::Result<()> {
    let grid = make_grid(128)?;
    let amplitude = Complex64::new(1.0, 0.0);
    let (m, tau, steps) = (3, 1e-2, 1000);
    let u0 = plane_wave(amplitude, m, grid)?;
    let exact = plane_wave_solution(amplitude, m, grid, Lambda::Focusing, tau * steps as f64)?;

    for kind in SchemeKind::ALL {
        let spec = SchemeSpec::for_data(kind, Lambda::Focusing, tau, 1.0, &u0)?;
        let u = evolve(&u0, &spec, steps, None)?;
        println!("{:<16} error {:.3e}", kind.name(), u.sub(&exact)?.l2_norm());
    }
    Ok(())
}
