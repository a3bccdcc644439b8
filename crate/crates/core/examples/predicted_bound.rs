//! Frequency cutoff and the error bound it balances, across regularities.

use nlsplit::experiments::predicted_bound;
use nlsplit::integrators::{choose_cutoff, theoretical_rate};

fn main() -> nlsplit::Result<()> {
    for gamma in [0.25, 0.5, 1.0, 1.5, 2.0] {
        println!("gamma = {gamma}, rate {:.4}", theoretical_rate(gamma)?);
        for j in [4, 8, 12, 16] {
            let tau = 2f64.powi(-j);
            let n = choose_cutoff(gamma, tau)?;
            println!(
                "  tau = 2^-{j:<2}  N = {n:>4}  bound {:.3e}",
                predicted_bound(gamma, tau, n)?
            );
        }
    }
    Ok(())
}
