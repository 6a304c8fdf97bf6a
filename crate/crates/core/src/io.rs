//! Plain-text spectrum files and the `min,max,step` grid syntax.
//!
//! A spectrum file is CSV with a comment line carrying the units, a header,
//! and one `Δ/ω_M, S·ω_M` pair per line rendered with 12 significant digits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{DetuningGrid, SpectrumGrid};

pub const CSV_HEADER: &str = "delta_over_omega_m,S_times_omega_m";
pub const CSV_UNIT_NOTE: &str = "# detuning (omega_k - omega_c) and spectral density, both in units of omega_M";

/// Uniform detuning axis written as `min,max,step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let spec = Self { min, max, step };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(invalid("grid", "bounds and step must be finite"));
        }
        if self.min >= self.max {
            return Err(invalid("grid", format!("min {} must be below max {}", self.min, self.max)));
        }
        if self.step <= 0.0 {
            return Err(invalid("grid", format!("step {} must be positive", self.step)));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<DetuningGrid> {
        DetuningGrid::uniform(self.min, self.max, self.step)
    }

    /// The same axis padded with geometric tails out to `±outer`.
    pub fn build_with_tails(&self, outer: f64) -> Result<DetuningGrid> {
        DetuningGrid::with_tails(self.min, self.max, self.step, outer, 1.05)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.min, self.max, self.step)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(invalid("grid", format!("expected min,max,step, got `{s}`")));
        }
        let mut v = [0.0; 3];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| invalid("grid", format!("`{part}` is not a number")))?;
        }
        Self::new(v[0], v[1], v[2])
    }
}

pub fn write_spectrum_csv<W: Write>(spec: &SpectrumGrid, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_UNIT_NOTE}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for (d, s) in spec.deltas.iter().zip(&spec.values) {
        writeln!(out, "{d:.11e},{s:.11e}")?;
    }
    out.flush()
}

pub fn spectrum_to_csv(spec: &SpectrumGrid) -> String {
    let mut buf = Vec::with_capacity(32 * spec.len() + 128);
    write_spectrum_csv(spec, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

fn parse_error(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Reads a two-column spectrum. Lines starting with `#` and blank lines are
/// skipped; the first remaining line must be the column header. Detunings
/// must increase strictly.
pub fn parse_spectrum_csv(text: &str) -> Result<SpectrumGrid> {
    let mut header_seen = false;
    let mut deltas = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            let names: Vec<&str> = line.split(',').map(str::trim).collect();
            if names != ["delta_over_omega_m", "S_times_omega_m"] {
                return Err(parse_error(line_no, format!("expected header `{CSV_HEADER}`")));
            }
            header_seen = true;
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (Some(d), Some(s), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_error(line_no, "expected two comma-separated values"));
        };
        let d: f64 = d.parse().map_err(|_| parse_error(line_no, format!("bad detuning `{d}`")))?;
        let s: f64 = s.parse().map_err(|_| parse_error(line_no, format!("bad spectral value `{s}`")))?;
        if !d.is_finite() || !s.is_finite() {
            return Err(parse_error(line_no, "values must be finite"));
        }
        if let Some(&last) = deltas.last() {
            if d <= last {
                return Err(parse_error(line_no, "detunings must increase"));
            }
        }
        deltas.push(d);
        values.push(s);
    }
    if !header_seen {
        return Err(parse_error(0, format!("missing header `{CSV_HEADER}`")));
    }
    if deltas.len() < 3 {
        return Err(parse_error(0, "a spectrum needs at least three samples"));
    }
    SpectrumGrid::new(deltas, values, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_spec_counts_points() {
        let g: GridSpec = "-8,4,0.002".parse().unwrap();
        assert_eq!(g.build().unwrap().len(), 6001);
        assert_eq!(g.to_string(), "-8,4,0.002");
        assert!(" -1 , 1 , 0.5 ".parse::<GridSpec>().is_ok());
    }

    #[test]
    fn grid_spec_rejects_bad_input() {
        for s in ["", "1,2", "1,2,3,4", "2,1,0.1", "0,1,0", "0,1,-1", "a,1,0.1", "0,inf,0.1", "0,1,NaN"] {
            assert!(s.parse::<GridSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn csv_layout() {
        let s = SpectrumGrid::new(vec![-1.0, 0.0, 0.5], vec![0.25, 1.0, 1.0 / 3.0], None).unwrap();
        let text = spectrum_to_csv(&s);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_UNIT_NOTE);
        assert_eq!(lines[1], CSV_HEADER);
        assert_eq!(lines[2], "-1.00000000000e0,2.50000000000e-1");
        assert_eq!(lines[4], "5.00000000000e-1,3.33333333333e-1");
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let missing = "1,2\n";
        assert!(matches!(parse_spectrum_csv(missing), Err(Error::Parse { line: 1, .. })));
        let bad = format!("{CSV_HEADER}\n0,1\n1,x\n2,1\n");
        assert!(matches!(parse_spectrum_csv(&bad), Err(Error::Parse { line: 3, .. })));
        let order = format!("# c\n{CSV_HEADER}\n0,1\n0,1\n1,1\n");
        assert!(matches!(parse_spectrum_csv(&order), Err(Error::Parse { line: 4, .. })));
        let wide = format!("{CSV_HEADER}\n0,1,2\n");
        assert!(matches!(parse_spectrum_csv(&wide), Err(Error::Parse { line: 2, .. })));
        assert!(parse_spectrum_csv("").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_keeps_twelve_digits(
            start in -10.0f64..0.0,
            steps in proptest::collection::vec(1e-3f64..0.5, 3..40),
            scale in 1e-12f64..1e3,
        ) {
            let mut deltas = vec![start];
            for h in &steps {
                let next = deltas.last().unwrap() + h;
                deltas.push(next);
            }
            let values: Vec<f64> = deltas.iter().map(|d| scale / (1.0 + d * d)).collect();
            let s = SpectrumGrid::new(deltas, values, None).unwrap();
            let back = parse_spectrum_csv(&spectrum_to_csv(&s)).unwrap();
            prop_assert_eq!(back.len(), s.len());
            for (a, b) in s.values.iter().zip(&back.values) {
                prop_assert!((a - b).abs() <= 5e-12 * a.abs());
            }
            for (a, b) in s.deltas.iter().zip(&back.deltas) {
                prop_assert!((a - b).abs() <= 5e-12 * a.abs().max(1e-300));
            }
        }

        #[test]
        fn parser_never_panics(text in "\\PC*") {
            let _ = parse_spectrum_csv(&text);
            let _ = text.parse::<GridSpec>();
        }
    }
}
