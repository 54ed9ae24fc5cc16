//! Text formats for meshes and fields.
//!
//! Mesh: first line `nv nt`, then `nv` lines `x y z`, then `nt` lines `i j k`
//! (0-based). Field: first line `nv`, then `nv` lines with one value each.
//! In both, `#` starts a comment and blank lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fplap_core::{DiscreteField, ManifoldMesh};

use crate::error::{FplapError, Result};
use crate::output::Provenance;

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((k + 1, l))
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> FplapError {
    FplapError::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

fn parse_numbers<T: std::str::FromStr>(path: &Path, line: usize, text: &str, count: usize) -> Result<Vec<T>> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != count {
        return Err(parse_err(path, line, format!("expected {count} values, found {}", parts.len())));
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| parse_err(path, line, format!("cannot parse `{p}`"))))
        .collect()
}

/// Parses mesh text; `path` is only used in error messages.
pub fn parse_mesh(text: &str, path: &Path) -> Result<ManifoldMesh> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty mesh file"))?;
    let counts: Vec<usize> = parse_numbers(path, hline, header, 2)?;
    let (nv, nt) = (counts[0], counts[1]);
    let mut coords = Vec::with_capacity(nv);
    let mut triangles = Vec::with_capacity(nt);
    let mut last = hline;
    for k in 0..nv + nt {
        let (line, l) = lines.next().ok_or_else(|| {
            let what = if k < nv { "vertex" } else { "triangle" };
            parse_err(path, last + 1, format!("unexpected end of file: {nv} vertices and {nt} triangles declared, {what} line missing"))
        })?;
        last = line;
        if k < nv {
            let x: Vec<f64> = parse_numbers(path, line, l, 3)?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(parse_err(path, line, "vertex coordinates must be finite"));
            }
            coords.push([x[0], x[1], x[2]]);
        } else {
            let t: Vec<usize> = parse_numbers(path, line, l, 3)?;
            if let Some(&v) = t.iter().find(|&&v| v >= nv) {
                return Err(parse_err(path, line, format!("vertex index {v} out of range 0..{nv}")));
            }
            triangles.push([t[0], t[1], t[2]]);
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(path, line, "trailing content after the declared triangles"));
    }
    Ok(ManifoldMesh::from_triangles(coords, triangles)?)
}

pub fn read_mesh(path: &Path) -> Result<ManifoldMesh> {
    let text = fs::read_to_string(path).map_err(|e| FplapError::io(path, e))?;
    parse_mesh(&text, path)
}

pub fn format_mesh(mesh: &ManifoldMesh, provenance: Option<&Provenance>) -> String {
    let mut out = provenance.map(Provenance::comment_header).unwrap_or_default();
    let _ = writeln!(out, "{} {}", mesh.len(), mesh.triangles().len());
    for c in mesh.coords() {
        let _ = writeln!(out, "{} {} {}", c[0], c[1], c[2]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn parse_field(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty field file"))?;
    let n: usize = parse_numbers::<usize>(path, hline, header, 1)?[0];
    let mut values = Vec::with_capacity(n);
    let mut last = hline;
    for _ in 0..n {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(path, last + 1, format!("unexpected end of file: {n} values declared, {} read", values.len())))?;
        last = line;
        values.push(parse_numbers::<f64>(path, line, l, 1)?[0]);
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(path, line, "trailing content after the declared values"));
    }
    Ok(values)
}

pub fn read_field(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| FplapError::io(path, e))?;
    parse_field(&text, path)
}

/// Field text; values use the shortest representation that round-trips exactly.
pub fn format_field(values: &[f64], provenance: Option<&Provenance>) -> String {
    let mut out = provenance.map(Provenance::comment_header).unwrap_or_default();
    let _ = writeln!(out, "{}", values.len());
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn write_field(path: &Path, field: &DiscreteField, provenance: &Provenance) -> Result<()> {
    fs::write(path, format_field(field.values(), Some(provenance))).map_err(|e| FplapError::io(path, e))
}
