use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Histogram, LossSweepRow, SpectrumEstimate};
use crate::gaussian::linear_to_db;

/// Version stamped into every JSON output.
pub const SCHEMA_VERSION: u32 = 1;

/// Wraps any report body with a `schema_version` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            body,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &Versioned::new(body))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Columns `freq_hz, power_rel, power_db`.
pub fn write_spectrum_csv(path: &Path, spectrum: &SpectrumEstimate) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["freq_hz", "power_rel", "power_db"])?;
    for (f, p) in spectrum.freqs.iter().zip(&spectrum.power) {
        w.write_record([f.to_string(), p.to_string(), linear_to_db(*p).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `bin_low, bin_high, count`.
pub fn write_histogram_csv(path: &Path, h: &Histogram) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_low", "bin_high", "count"])?;
    for (e, c) in h.edges.windows(2).zip(&h.counts) {
        w.write_record([e[0].to_string(), e[1].to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `gain_db, added_loss, squeezing_db_oracle, squeezing_db_mc`; the
/// last is empty when no Monte Carlo run was made.
pub fn write_sweep_csv(path: &Path, rows: &[LossSweepRow]) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["gain_db", "added_loss", "squeezing_db_oracle", "squeezing_db_mc"])?;
    for r in rows {
        w.write_record([
            r.gain_db.to_string(),
            r.added_loss.to_string(),
            r.squeezing_db_oracle.to_string(),
            r.squeezing_db_mc.map_or_else(String::new, |v| v.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
