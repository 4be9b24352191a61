//! Sampled potentials from two-column CSV files.

use std::io::Read;
use std::path::Path;

use bslab_core::potentials::Potential;

use crate::Error;

/// Reads `x,U` rows (header required). Abscissae must be strictly
/// increasing and every `U` non-negative; the potential is the piecewise
/// linear interpolant, zero outside the sampled range.
pub fn read_potential(path: &Path) -> Result<Potential, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_potential(file).map_err(|msg| Error::Input { path: path.to_path_buf(), msg })
}

pub fn parse_potential(src: impl Read) -> Result<Potential, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(src);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "U" {
        return Err(format!("expected header `x,U`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")));
    }
    let (mut xs, mut us) = (Vec::new(), Vec::new());
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| format!("line {line}: {e}"))?;
        let num = |j: usize, what: &str| -> Result<f64, String> {
            let v: f64 = row[j].parse().map_err(|_| format!("line {line}: {what} = `{}` is not a number", &row[j]))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("line {line}: {what} is not finite"))
            }
        };
        let (x, u) = (num(0, "x")?, num(1, "U")?);
        if let Some(&prev) = xs.last() {
            if x <= prev {
                return Err(format!("line {line}: x = {x} is not greater than the previous x = {prev}"));
            }
        }
        if u < 0.0 {
            return Err(format!("line {line}: U = {u} is negative"));
        }
        xs.push(x);
        us.push(u);
    }
    Potential::sampled(xs, us).map_err(|e| e.to_string())
}
