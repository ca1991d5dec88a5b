use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use iqme::markov::ModelInterpretation;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliResult;

/// Everything needed to reproduce one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<ModelInterpretation>,
    /// Calibration outcome behind `interpretation`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Value>,
    /// Sidecar only; left out of CSV headers so reruns stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    /// Sidecar only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<Value>,
}

impl RunManifest {
    pub fn new(command: &str, params: Value) -> Self {
        Self {
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            params,
            master_seed: None,
            interpretation: None,
            calibration: None,
            wall_clock_seconds: None,
            results: None,
        }
    }

    fn header_view(&self) -> Self {
        Self { wall_clock_seconds: None, results: None, ..self.clone() }
    }
}

/// A table waiting to be written.
#[derive(Debug, Clone)]
pub struct CsvOutput {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvOutput {
    pub fn new(file_name: impl Into<String>, header: &[&str]) -> Self {
        Self { file_name: file_name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, manifest: &RunManifest) -> CliResult<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "# iqme run manifest")?;
        writeln!(buf, "# {}", serde_json::to_string(&manifest.header_view())?)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

fn sidecar_path(dir: &Path, file_name: &str) -> PathBuf {
    let stem = file_name.strip_suffix(".csv").unwrap_or(file_name);
    dir.join(format!("{stem}.manifest.json"))
}

/// Writes every table with the manifest header, then one sidecar per table
/// carrying the full manifest.
pub fn emit(dir: &Path, outputs: &[CsvOutput], mut manifest: RunManifest, started: Instant) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(outputs.len());
    for out in outputs {
        let path = dir.join(&out.file_name);
        fs::write(&path, out.render(&manifest)?)?;
        written.push(path);
    }
    manifest.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    let mut sidecar = serde_json::to_string_pretty(&manifest)?;
    sidecar.push('\n');
    for out in outputs {
        fs::write(sidecar_path(dir, &out.file_name), &sidecar)?;
    }
    Ok(written)
}

/// Reads back the data rows of a CSV written by [`emit`], skipping the
/// manifest block.
pub fn read_table(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.map(|r| r.iter().map(str::to_string).collect())).collect::<Result<_, _>>()?;
    Ok((header, rows))
}
