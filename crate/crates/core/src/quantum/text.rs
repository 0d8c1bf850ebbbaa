//! Plain-text density operator documents.
//!
//! ```text
//! dim = 4
//! real
//! 5.00000000000000000e-1 0.00000000000000000e0 ...
//! ...
//! imag
//! ...
//! ```
//!
//! Lines starting with `#` are comments. Entries are written with 17
//! significant digits.

use std::fmt::Write as _;

use super::{CMatrix, DensityOperator, C64};
use crate::error::{Error, Result};

pub fn write_density_operator(rho: &DensityOperator) -> String {
    let dim = rho.dim();
    let mut out = String::new();
    let _ = writeln!(out, "dim = {dim}");
    for (name, part) in [("real", 0), ("imag", 1)] {
        let _ = writeln!(out, "{name}");
        for r in 0..dim {
            let row: Vec<String> = (0..dim)
                .map(|c| {
                    let z = rho.entry(r, c);
                    let v = if part == 0 { z.re } else { z.im };
                    format!("{v:.16e}")
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

pub fn parse_density_operator(text: &str) -> Result<DensityOperator> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let dim_line = lines
        .next()
        .ok_or_else(|| Error::Parse("empty density operator document".into()))?;
    let dim: usize = dim_line
        .strip_prefix("dim")
        .and_then(|r| r.trim().strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected `dim = N`, got `{dim_line}`")))?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("dim: {e}")))?;
    let mut parts = [vec![], vec![]];
    for (k, name) in ["real", "imag"].iter().enumerate() {
        match lines.next() {
            Some(l) if l == *name => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected `{name}`, got {other:?}"
                )))
            }
        }
        for r in 0..dim {
            let row = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("{name}: missing row {r}")))?;
            let vals = row
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{name}[{r}]: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != dim {
                return Err(Error::Parse(format!(
                    "{name}: row {r} has {} entries, expected {dim}",
                    vals.len()
                )));
            }
            parts[k].extend(vals);
        }
    }
    let m = CMatrix::from_fn(dim, dim, |r, c| C64::new(parts[0][r * dim + c], parts[1][r * dim + c]));
    DensityOperator::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{canonical_state, CanonicalState};

    #[test]
    fn round_trip_is_exact() {
        let rho = canonical_state(CanonicalState::GhzTheta(0.7))
            .unwrap()
            .projector()
            .mix(0.6, &DensityOperator::maximally_mixed(3))
            .unwrap();
        let text = write_density_operator(&rho);
        let back = parse_density_operator(&text).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn rejects_truncated_documents() {
        assert!(parse_density_operator("dim = 2\nreal\n1 0\n").is_err());
        assert!(parse_density_operator("").is_err());
    }
}
