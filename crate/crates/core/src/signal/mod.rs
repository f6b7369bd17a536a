//! Detection electronics and time-domain homodyne traces.
//!
//! Traces are expressed in shot-noise units per sample: white vacuum noise at
//! the reference photocurrent has per-sample variance 1/2, and the matching
//! one-sided relative PSD is 1 at every frequency.

mod acquisition;
mod psd;
mod response;
mod synth;
mod trace;
mod wavepacket;

pub use acquisition::{
    AcquisitionConfig, ElectricalFloor, CLEARANCE_REFERENCE_HZ, REFERENCE_PHOTOCURRENT_A,
};
pub use psd::{psd_model, PsdModel};
pub use response::{FilterShape, FrequencyResponse};
pub use synth::{synthesize_frame, synthesize_frames, FrameSynthesizer};
pub use trace::{
    read_trace_file, write_trace_csv, write_trace_file, TraceHeader, TraceReader, TraceRecord,
    TraceWriter, TRACE_FORMAT_VERSION, TRACE_HEADER_LEN, TRACE_MAGIC,
};
pub use wavepacket::{extract_wavepacket, ModeFunction};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("invalid {name} = {value}: {reason}")]
    Config {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("window [{start}, {end}) overruns trace of {len} samples")]
    Range { start: i64, end: i64, len: usize },
    #[error("sample interval mismatch: trace {trace} s, mode {mode} s")]
    IntervalMismatch { trace: f64, mode: f64 },
    #[error("malformed trace file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Chain(#[from] crate::gaussian::GaussianError),
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<(), SignalError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SignalError::Config {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
