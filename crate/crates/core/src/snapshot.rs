//! Plain-text field snapshots.
//!
//! ```text
//! nlsfield v1 M=<M>
//! <k> <re> <im>        (M lines, k increasing from -M/2)
//! ```
//!
//! Floats are written with 17 significant digits, so a write/read cycle is
//! lossless.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectralField};

const MAGIC: &str = "nlsfield v1";

pub fn write_snapshot<W: Write>(field: &SpectralField, mut out: W) -> Result<()> {
    writeln!(out, "{MAGIC} M={}", field.grid().modes())?;
    for (k, c) in field.modes() {
        writeln!(out, "{k} {:.16e} {:.16e}", c.re, c.im)?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(input: R) -> Result<SpectralField> {
    let err = |line: usize, message: String| Error::Snapshot { line, message };
    let mut lines = BufReader::new(input).lines();

    let header = lines
        .next()
        .ok_or_else(|| err(1, "empty input".into()))??;
    let modes = header
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.trim().strip_prefix("M="))
        .ok_or_else(|| err(1, format!("bad header {header:?}")))?
        .parse::<usize>()
        .map_err(|e| err(1, format!("bad mode count: {e}")))?;
    let grid = GridSpec::new(modes).map_err(|e| err(1, e.to_string()))?;

    let mut field = SpectralField::zeros(grid);
    let mut expected = grid.wavenumbers();
    let mut count = 0usize;
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(lineno, format!("expected `k re im`, got {line:?}")));
        }
        let k: i64 = parts[0]
            .parse()
            .map_err(|e| err(lineno, format!("bad wavenumber: {e}")))?;
        match expected.next() {
            Some(want) if want == k => {}
            Some(want) => {
                return Err(err(lineno, format!("expected wavenumber {want}, got {k}")))
            }
            None => return Err(err(lineno, format!("more than {modes} coefficient lines"))),
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| err(lineno, format!("bad number {s:?}: {e}")))
        };
        let c = Complex64::new(parse(parts[1])?, parse(parts[2])?);
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(err(lineno, "non-finite coefficient".into()));
        }
        field.set_coeff(k, c)?;
        count += 1;
    }
    if count != modes {
        return Err(err(
            count + 2,
            format!("incomplete snapshot: {count} of {modes} coefficients"),
        ));
    }
    Ok(field)
}

pub fn save_snapshot(field: &SpectralField, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_snapshot(field, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<SpectralField> {
    read_snapshot(fs::File::open(path)?)
}
