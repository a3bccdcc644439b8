//! Rough random data: prints the spectrum envelope and Sobolev norms around the
//! nominal regularity. Norms above `gamma` grow with the resolution.

use nlsplit::datagen::{rough_field, RoughDataSpec};

fn main() -> nlsplit::Result<()> {
    let gamma = 0.5;
    for modes in [256, 1024, 4096] {
        let u = rough_field(&RoughDataSpec::new(gamma, 42, modes))?;
        let norms: Vec<String> = [gamma - 0.25, gamma, gamma + 0.25, gamma + 0.5]
            .iter()
            .map(|&s| format!("H^{s:.2} {:.3}", u.sobolev_norm(s)))
            .collect();
        println!("M = {modes:<5} {}", norms.join("  "));
    }

    let u = rough_field(&RoughDataSpec::new(gamma, 42, 1024))?;
    println!("\n{:>5} {:>12}", "k", "|u_k|");
    for k in [0i64, 1, 4, 16, 64, 256, 257] {
        println!("{k:>5} {:>12.4e}", u.coeff(k).norm());
    }
    Ok(())
}
