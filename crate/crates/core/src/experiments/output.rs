use std::fmt::Write as _;
use std::io::{self, Write};

use super::{CellStatus, ConvergenceReport};

pub const CSV_HEADER: &str = "scheme,tau,N,error_l2,mass_drift,wall_ms";

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One line per completed cell, in report order. `N` is empty for schemes
/// without a cutoff.
pub fn write_csv<W: Write>(report: &ConvergenceReport, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in report.rows.iter().filter(|r| r.status == CellStatus::Ok) {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.scheme,
            sig17(row.tau),
            row.cutoff.map(|n| n.to_string()).unwrap_or_default(),
            row.error_l2.map(sig17).unwrap_or_default(),
            row.mass_drift.map(sig17).unwrap_or_default(),
            sig17(row.wall_ms),
        )?;
    }
    Ok(())
}

/// gnuplot script: log-log error against step size per scheme, with dashed
/// guide lines of the fitted and predicted slopes.
pub fn gnuplot_script(report: &ConvergenceReport, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# error vs step size, generated by nlsplit");
    let _ = writeln!(s, "set terminal pngcairo size 900,650");
    let _ = writeln!(s, "set output '{title}.png'");
    let _ = writeln!(s, "set logscale xy 2");
    let _ = writeln!(s, "set xlabel 'tau'");
    let _ = writeln!(s, "set ylabel 'L2 error at T'");
    let _ = writeln!(s, "set key left top");
    let _ = writeln!(s, "set title '{title} (gamma = {})'", report.config.gamma);

    let mut plots = Vec::new();
    for (i, fit) in report.slopes.iter().enumerate() {
        let name = fit.scheme.name().replace('-', "_");
        let _ = writeln!(s, "$data_{name} << EOD");
        for row in report.rows_for(fit.scheme) {
            if let (CellStatus::Ok, Some(e)) = (&row.status, row.error_l2) {
                let _ = writeln!(s, "{} {}", sig17(row.tau), sig17(e));
            }
        }
        let _ = writeln!(s, "EOD");
        plots.push(format!(
            "$data_{name} using 1:2 with linespoints lt {} title '{}'",
            i + 1,
            fit.scheme
        ));
        // guide line through the largest usable point
        if let (Some(slope), Some(tau_max)) = (fit.slope, fit.tau_max) {
            if let Some(e) = report
                .rows_for(fit.scheme)
                .find(|r| r.tau == tau_max)
                .and_then(|r| r.error_l2)
            {
                plots.push(format!(
                    "{} * (x / {})**{} with lines dt 2 lt {} title 'fit {:.3}'",
                    sig17(e),
                    sig17(tau_max),
                    slope,
                    i + 1,
                    slope
                ));
            }
        }
    }
    if let (Some(rate), Some(fit)) = (report.predicted_rate, report.slopes.first()) {
        if let Some(row) = report
            .rows_for(fit.scheme)
            .find(|r| r.error_l2.is_some())
        {
            plots.push(format!(
                "{} * (x / {})**{} with lines dt 3 lc rgb 'black' title 'tau^{{{:.3}}}'",
                sig17(row.error_l2.unwrap_or(1.0)),
                sig17(row.tau),
                rate,
                rate
            ));
        }
    }
    if plots.is_empty() {
        let _ = writeln!(s, "# no completed rows");
    } else {
        let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    }
    s
}
