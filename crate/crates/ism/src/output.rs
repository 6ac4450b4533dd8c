//! CSV and JSON writers. Floats are printed with 17 significant digits in
//! scientific notation so that reruns compare byte for byte.

use std::fs;
use std::path::Path;

use ism_core::Vec3;

use crate::error::CliError;

pub const SNAPSHOT_HEADER: [&str; 11] = ["t", "agent_id", "x1", "x2", "x3", "v1", "v2", "v3", "s1", "s2", "s3"];
pub const DIAGNOSTIC_HEADER: [&str; 11] = [
    "t", "E", "U", "w_norm", "w1", "w2", "w3", "max_sigma", "spin1", "spin2", "spin3",
];
pub const FIELD_1D_HEADER: [&str; 9] = ["t", "cell", "rho", "u1", "u2", "u3", "sigma1", "sigma2", "sigma3"];
pub const FIELD_POLAR_HEADER: [&str; 5] = ["t", "cell", "rho", "theta", "sigma"];
pub const CHAIN_HEADER: [&str; 11] = ["t", "sample", "x1", "x2", "x3", "v1", "v2", "v3", "s1", "s2", "s3"];
pub const BIFURCATION_HEADER: [&str; 3] = ["beta_J", "xi", "gamma"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV record under construction.
#[derive(Debug, Default, Clone)]
pub struct Row(Vec<String>);

impl Row {
    pub fn new() -> Self {
        Row(Vec::new())
    }

    pub fn real(mut self, x: f64) -> Self {
        self.0.push(fmt_f64(x));
        self
    }

    pub fn index(mut self, i: usize) -> Self {
        self.0.push(i.to_string());
        self
    }

    pub fn vec3(self, v: Vec3) -> Self {
        self.real(v.x).real(v.y).real(v.z)
    }

    /// Comma-joined fields; no quoting is needed for numbers.
    pub fn join(&self) -> String {
        self.0.join(",")
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Row>) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row.0).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads a CSV with a header row into column names and numeric records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let header: Vec<String> = r.headers().map_err(io)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(io)?;
        let row = record
            .iter()
            .map(|field| field.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Verification(format!("{}: record {}: {e}", path.display(), i + 1)))?;
        rows.push(row);
    }
    Ok((header, rows))
}
