//! Preference matrices on disk.
//!
//! CSV is row-major with an optional `# k=K` comment line; JSON is
//! `{"k": K, "p": [[...], ...]}`. CSV values are written with 17
//! significant digits, JSON uses the shortest representation that parses
//! back to the same `f64`. Both round-trip exactly.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rucb_core::PreferenceMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

impl MatrixFormat {
    /// `.json` is JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => MatrixFormat::Json,
            _ => MatrixFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    k: usize,
    p: Vec<Vec<f64>>,
}

fn declared_k(text: &str) -> Option<Result<usize, String>> {
    text.lines()
        .map(str::trim)
        .filter_map(|l| l.strip_prefix('#'))
        .find_map(|c| c.trim().strip_prefix("k="))
        .map(|v| v.trim().parse::<usize>().map_err(|e| format!("bad k= line: {e}")))
}

pub fn parse_csv(text: &str) -> Result<PreferenceMatrix, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| format!("row {}: {f:?}: {e}", rows.len())))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if let Some(k) = declared_k(text) {
        let k = k?;
        if k != rows.len() {
            return Err(format!("header says k={k} but found {} rows", rows.len()));
        }
    }
    PreferenceMatrix::validate(&rows).map_err(|e| e.to_string())
}

pub fn parse_json(text: &str) -> Result<PreferenceMatrix, String> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if m.k != m.p.len() {
        return Err(format!("k={} but found {} rows", m.k, m.p.len()));
    }
    PreferenceMatrix::validate(&m.p).map_err(|e| e.to_string())
}

pub fn to_csv(m: &PreferenceMatrix) -> String {
    let mut out = format!("# k={}\n", m.k());
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for row in m.rows() {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))
            .expect("writing to memory");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii"));
    out
}

pub fn to_json(m: &PreferenceMatrix) -> String {
    let j = MatrixJson {
        k: m.k(),
        p: m.rows().map(<[f64]>::to_vec).collect(),
    };
    serde_json::to_string_pretty(&j).expect("plain data serializes") + "\n"
}

pub fn read_matrix(path: &Path) -> Result<PreferenceMatrix, HarnessError> {
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| HarnessError::io(path, e))?;
    match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => parse_csv(&text),
        MatrixFormat::Json => parse_json(&text),
    }
    .map_err(|e| HarnessError::parse(path, e))
}

pub fn write_matrix(path: &Path, m: &PreferenceMatrix, format: MatrixFormat) -> Result<(), HarnessError> {
    let text = match format {
        MatrixFormat::Csv => to_csv(m),
        MatrixFormat::Json => to_json(m),
    };
    fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| HarnessError::io(path, e))
}

/// SHA-256 of the canonical CSV form, hex encoded.
pub fn matrix_hash(m: &PreferenceMatrix) -> String {
    hex::encode(Sha256::digest(to_csv(m).as_bytes()))
}
