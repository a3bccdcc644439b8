//! Small convergence study: error at `T = 1` against a fine Strang reference
//! for a dyadic range of step sizes, with fitted log-log slopes and CSV output.
//!
//! ```text
//! cargo run --example convergence_sweep -- 1.5
//! ```

use std::io;

use nlsplit::experiments::{convergence_study, write_csv, RunConfig};
use nlsplit::integrators::SchemeKind;

fn main() -> nlsplit::Result<()> {
    let gamma: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("gamma must be a number"))
        .unwrap_or(1.0);
    let config = RunConfig::dyadic(
        gamma,
        1.0,
        1.0 / 32.0,
        6,
        512,
        42,
        vec![SchemeKind::Strang, SchemeKind::FilteredStrang, SchemeKind::ModifiedV2],
    );
    let report = convergence_study(&config)?;

    write_csv(&report, io::stdout().lock())?;
    println!();
    for fit in &report.slopes {
        match fit.slope {
            Some(s) => println!("{:<16} slope {s:.3}", fit.scheme.name()),
            None => println!("{:<16} {}", fit.scheme.name(), fit.note.as_deref().unwrap_or("")),
        }
    }
    if let Some(rate) = report.predicted_rate {
        println!("predicted {rate:.3}");
    }
    Ok(())
}
