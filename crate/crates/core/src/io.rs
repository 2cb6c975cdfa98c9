//! CSV formats for matrices and observation tables.
//!
//! Numbers are written in C `%.17g` form so files round-trip bit-exactly
//! and match output from other toolchains.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimators::ObsMatrix;
use crate::matcore::SymMatrix;

/// Symmetry tolerance applied when reading a matrix from CSV.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Tokens read as a missing observation.
pub const MISSING_TOKENS: [&str; 4] = ["NA", "NaN", "nan", ""];

/// Formats like C's `printf("%.17g", x)`.
pub fn format_g17(x: f64) -> String {
    const PRECISION: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    // 17 significant digits in scientific form gives the decimal exponent
    // after rounding.
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= PRECISION {
        let mantissa = strip_trailing_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp) as usize;
        strip_trailing_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_trailing_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(',').map(str::trim)
}

fn parse_number(token: &str, source: &str, line: usize) -> Result<f64> {
    token.parse::<f64>().map_err(|_| Error::Parse {
        source_name: source.into(),
        line,
        message: format!("invalid number {token:?}"),
    })
}

/// Full `p x p` matrix, one row per line, `%.17g` formatting.
pub fn sym_matrix_to_csv(m: &SymMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|v| format_g17(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses a full matrix; asymmetry up to [`SYMMETRY_TOLERANCE`] is
/// averaged away.
pub fn sym_matrix_from_csv(text: &str, source: &str) -> Result<SymMatrix> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = split_fields(line)
            .map(|t| parse_number(t, source, ln + 1))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            source_name: source.into(),
            line: 0,
            message: "empty matrix".into(),
        });
    }
    SymMatrix::from_rows_with_tolerance(&rows, SYMMETRY_TOLERANCE)
}

pub fn read_sym_matrix(path: &Path) -> Result<SymMatrix> {
    sym_matrix_from_csv(&read_text(path)?, &path.display().to_string())
}

pub fn write_sym_matrix(path: &Path, m: &SymMatrix) -> Result<()> {
    write_text(path, &sym_matrix_to_csv(m))
}

fn is_missing_token(t: &str) -> bool {
    MISSING_TOKENS.contains(&t)
}

/// `n` data rows of `p` fields; an optional first header row is detected
/// when any of its fields is neither a number nor a missing token.
pub fn obs_matrix_from_csv(text: &str, source: &str) -> Result<ObsMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    if let Some((_, first)) = lines.peek() {
        let header = split_fields(first).any(|t| !is_missing_token(t) && t.parse::<f64>().is_err());
        if header {
            lines.next();
        }
    }
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for (ln, line) in lines {
        let row = split_fields(line)
            .map(|t| {
                if is_missing_token(t) {
                    Ok(None)
                } else {
                    parse_number(t, source, ln + 1).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    source_name: source.into(),
                    line: ln + 1,
                    message: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            source_name: source.into(),
            line: 0,
            message: "no data rows".into(),
        });
    }
    ObsMatrix::from_option_rows(&rows).map_err(|e| Error::Parse {
        source_name: source.into(),
        line: 0,
        message: e.to_string(),
    })
}

/// Writes data rows only; missing entries become `NA`.
pub fn obs_matrix_to_csv(x: &ObsMatrix) -> String {
    let mut out = String::new();
    for k in 0..x.n() {
        let row: Vec<String> = (0..x.p())
            .map(|j| x.get(k, j).map_or_else(|| "NA".to_string(), format_g17))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_obs_matrix(path: &Path) -> Result<ObsMatrix> {
    obs_matrix_from_csv(&read_text(path)?, &path.display().to_string())
}

pub fn write_obs_matrix(path: &Path, x: &ObsMatrix) -> Result<()> {
    write_text(path, &obs_matrix_to_csv(x))
}
