//! CSV tables and run manifests.

use std::path::Path;

use flatlimit::cubature::Unisolvency;
use flatlimit::experiments::{RateFit, SweepFailure};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// `f64` rendered with 17 significant digits.
pub fn f64_cell(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
        w.write_record(&self.header).map_err(csv_error)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[derive(Debug, Serialize)]
pub struct PrecisionDecision {
    pub length_scale: f64,
    pub bits: u32,
}

#[derive(Debug, Serialize)]
pub struct PrecisionSummary {
    pub policy: String,
    /// `flag`, `environment`, `config` or `default`.
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_bits: Option<u32>,
    pub decisions: Vec<PrecisionDecision>,
}

/// Run record written next to each table. Contains no timestamps so that
/// identical runs give identical files.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub library_version: String,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_limit_hypothesis_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial_weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauss_nodes: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauss_weights: Option<Vec<f64>>,
    pub precision: PrecisionSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unisolvency: Option<Unisolvency>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    pub failures: Vec<SweepFailure>,
}

impl Manifest {
    pub fn new(command: &str, config_bytes: &[u8], policy: String, source: &str, seed: Option<u64>) -> Self {
        Manifest {
            command: command.to_string(),
            library_version: flatlimit::VERSION.to_string(),
            config_sha256: hex::encode(Sha256::digest(config_bytes)),
            seed,
            flat_limit_hypothesis_verified: None,
            polynomial_weights: None,
            gauss_nodes: None,
            gauss_weights: None,
            precision: PrecisionSummary {
                policy,
                source: source.to_string(),
                fixed_bits: None,
                decisions: Vec::new(),
            },
            unisolvency: None,
            fit: None,
            failures: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_have_seventeen_digits() {
        assert_eq!(f64_cell(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(f64_cell(100.0), "1.0000000000000000e2");
    }

    #[test]
    fn manifest_is_valid_toml() {
        let mut m = Manifest::new("sweep", b"x = 1\n", "auto".into(), "config", None);
        m.precision.decisions.push(PrecisionDecision { length_scale: 10.0, bits: 84 });
        let text = toml::to_string(&m).unwrap();
        let back: toml::Value = toml::from_str(&text).unwrap();
        assert_eq!(back["command"].as_str(), Some("sweep"));
        assert_eq!(back["config_sha256"].as_str().unwrap().len(), 64);
    }
}
