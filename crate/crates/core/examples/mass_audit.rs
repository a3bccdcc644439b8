//! Tracks the discrete mass along a run of each scheme on rough data.
//!
//! The v2 and power schemes are unitary compositions and conserve it; v1 and
//! filtered Strang can only lose mass through their projections.

use nlsplit::datagen::{rough_field, RoughDataSpec};
use nlsplit::flows::Lambda;
use nlsplit::integrators::{evolve, SchemeKind, SchemeSpec};

fn main() -> nlsplit::Result<()> {
    let gamma = 1.0;
    let u0 = rough_field(&RoughDataSpec::new(gamma, 7, 1024))?;
    let m0 = u0.mass();
    let (tau, steps) = (1e-3, 2000);

    println!("{:<16} {:>12} {:>12}", "scheme", "max drift", "max rise");
    for kind in SchemeKind::ALL {
        let spec = SchemeSpec::for_data(kind, Lambda::Focusing, tau, gamma, &u0)?;
        let mut prev = m0;
        let (mut drift, mut rise) = (0.0f64, f64::NEG_INFINITY);
        let mut observe = |_n: usize, _t: f64, u: &nlsplit::spectral::SpectralField| {
            let m = u.mass();
            drift = drift.max((m - m0).abs() / m0);
            rise = rise.max(m - prev);
            prev = m;
        };
        evolve(&u0, &spec, steps, Some(&mut observe))?;
        println!("{:<16} {drift:>12.3e} {rise:>12.3e}", kind.name());
    }
    Ok(())
}
