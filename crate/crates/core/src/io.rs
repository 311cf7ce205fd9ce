//! Plain-text formats: point and table CSVs with a `#` header comment, and
//! JSON lines. Numbers use `.` decimals and full round-trip precision.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Hyperrectangle;
use crate::minimize::Trace;
use crate::model::Configuration;

fn comment_lines(out: &mut String, comment: &str) {
    for line in comment.lines() {
        let _ = writeln!(out, "# {line}");
    }
}

fn table(comment: &str, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    comment_lines(&mut out, comment);
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// One point per row under the header `x0,…,x{d−1}`.
pub fn points_to_csv(config: &Configuration, comment: &str) -> String {
    let header: Vec<String> = (0..config.dim()).map(|i| format!("x{i}")).collect();
    table(comment, &header, config.points().map(|p| p.iter().map(|&v| num(v)).collect()))
}

/// Inverse of [`points_to_csv`]; `#` lines and blank lines are skipped.
pub fn points_from_csv(text: &str) -> Result<Configuration> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Invalid("points file has no header".into()))?;
    let d = header.split(',').count();
    let mut coords = Vec::new();
    for (i, line) in lines.enumerate() {
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != d {
            return Err(Error::Invalid(format!("row {} has {} columns, expected {d}", i + 1, vals.len())));
        }
        for v in vals {
            coords.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Invalid(format!("row {}: {e}", i + 1)))?,
            );
        }
    }
    Configuration::new(d, coords)
}

pub fn trace_to_csv(trace: &Trace, comment: &str) -> String {
    let header = ["iter", "energy", "grad_inf", "step"].map(String::from);
    table(
        comment,
        &header,
        trace
            .entries
            .iter()
            .map(|e| vec![e.iter.to_string(), num(e.energy), num(e.grad_inf), num(e.step)]),
    )
}

/// Cell bounds per row: `lo0,…,hi0,…`.
pub fn partition_to_csv(cells: &[Hyperrectangle], comment: &str) -> String {
    let d = cells.first().map_or(0, Hyperrectangle::dim);
    let mut header: Vec<String> = (0..d).map(|i| format!("lo{i}")).collect();
    header.extend((0..d).map(|i| format!("hi{i}")));
    table(
        comment,
        &header,
        cells.iter().map(|c| c.lower().into_iter().chain(c.upper()).map(num).collect()),
    )
}

/// Two-column table `(t, C2)`.
pub fn profile_to_csv(profile: &[(f64, f64)], comment: &str) -> String {
    let header = ["t", "C2"].map(String::from);
    table(comment, &header, profile.iter().map(|(t, c)| vec![num(*t), num(*c)]))
}

/// Generic numeric table.
pub fn rows_to_csv(header: &[&str], rows: &[Vec<f64>], comment: &str) -> String {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    table(comment, &header, rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()))
}

/// One compact JSON document per line.
pub fn to_json_lines<T: Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).map_err(|e| Error::Invalid(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_round_trip() {
        let c = Configuration::new(2, vec![0.1, -2.5, 1e-17, 3.0]).unwrap();
        let text = points_to_csv(&c, "manifest sha256 abc");
        assert!(text.starts_with("# manifest sha256 abc\nx0,x1\n"));
        let back = points_from_csv(&text).unwrap();
        assert_eq!(back.coords(), c.coords());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(points_from_csv("x0,x1\n1,2\n3\n").is_err());
    }
}
