//! Provenance headers and the JSON, CSV and kernel-dump writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fplap_core::KernelMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{FplapError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identifies the inputs of a run; written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the configuration file bytes.
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_bytes: &[u8], seed: u64) -> Self {
        Self {
            tool: "fplap".into(),
            version: VERSION.into(),
            config_sha256: hex::encode(Sha256::digest(config_bytes)),
            seed,
        }
    }

    /// `#`-prefixed lines for CSV and text formats.
    pub fn comment_header(&self) -> String {
        format!(
            "# {} {}\n# config_sha256 {}\n# seed {}\n",
            self.tool, self.version, self.config_sha256, self.seed
        )
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with `provenance` as the first key, followed by the fields of `body`.
pub fn to_json<T: Serialize>(provenance: &Provenance, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Document { provenance, body }).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, provenance: &Provenance, body: &T) -> Result<()> {
    write_file(path, to_json(provenance, body).as_bytes())
}

/// CSV with the provenance comment lines, a header row and one line per record.
pub fn to_csv(provenance: &Provenance, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(provenance.comment_header().into_bytes());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn write_csv(path: &Path, provenance: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_file(path, to_csv(provenance, header, rows).as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| FplapError::io(path, e))
}

/// Shortest round-trip decimal form; non-finite values as `nan`, `inf`, `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// Upper-triangle kernel dump `i,j,w` for `i < j`, with `n, s, p, N, c_floor` in the header.
pub fn kernel_dump_csv(kernel: &KernelMatrix, provenance: &Provenance) -> String {
    let prm = kernel.params();
    let mut out = provenance.comment_header();
    let _ = writeln!(
        out,
        "# n {} s {} p {} N {} c_floor {}",
        kernel.len(),
        prm.s,
        prm.p,
        kernel.dim(),
        prm.policy.c_floor
    );
    out.push_str("i,j,w\n");
    for i in 0..kernel.len() {
        for j in (i + 1)..kernel.len() {
            let _ = writeln!(out, "{i},{j},{}", kernel.weight(i, j));
        }
    }
    out
}
