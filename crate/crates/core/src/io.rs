//! CSV helpers for signals and filters.
//!
//! Signals are written as `index,value` with 17 significant digits. Readers
//! accept either one value per line or `index,value` rows, with an optional
//! header line.

use std::path::Path;

use crate::error::{BisrError, Result};

/// Formats with 17 significant digits (round-trips every `f64`).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses numeric CSV text. For rows with two or more fields the last field is
/// taken; a non-numeric first line is treated as a header.
pub fn parse_column(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(BisrError::domain(format!("line {}: non-finite value", lineno + 1))),
            Err(_) if out.is_empty() && lineno == 0 => continue,
            Err(_) => return Err(BisrError::domain(format!("line {}: cannot parse {field:?}", lineno + 1))),
        }
    }
    if out.is_empty() {
        return Err(BisrError::domain("no numeric values found"));
    }
    Ok(out)
}

pub fn read_column(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| BisrError::Io(format!("{}: {e}", path.display())))?;
    parse_column(&text).map_err(|e| match e {
        BisrError::Domain(m) => BisrError::Domain(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Two-column `index,value` CSV.
pub fn signal_to_csv(x: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in x.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_f64(*v)));
    }
    out
}

pub fn write_signal(path: &Path, x: &[f64]) -> Result<()> {
    std::fs::write(path, signal_to_csv(x)).map_err(|e| BisrError::Io(format!("{}: {e}", path.display())))
}

/// Comma-separated inline list such as `"1,0.5,-0.25"`.
pub fn parse_inline_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| BisrError::domain(format!("cannot parse {t:?} as a number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456789.12345679, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn parses_both_layouts() {
        assert_eq!(parse_column("1\n2.5\n-3\n").unwrap(), vec![1.0, 2.5, -3.0]);
        assert_eq!(parse_column("index,value\n0,1.5\n1,-2\n").unwrap(), vec![1.5, -2.0]);
        let x = [0.25, -7.0, 1e-9];
        assert_eq!(parse_column(&signal_to_csv(&x)).unwrap(), x.to_vec());
        assert!(parse_column("a\nb\n").is_err());
        assert!(parse_column("").is_err());
        assert!(parse_column("1\nnan\n").is_err());
    }

    #[test]
    fn inline_lists() {
        assert_eq!(parse_inline_list("1, 0.5,-0.25").unwrap(), vec![1.0, 0.5, -0.25]);
        assert!(parse_inline_list("1,,2").is_err());
    }
}
