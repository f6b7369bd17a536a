//! Measurement-side processing of homodyne traces.

mod fit;
mod histogram;
mod levels;
mod report;
mod spectrum;
mod sweep;

pub use fit::{
    fit_pump_curve, Coupling, FitError, FitEstimates, FitOptions, FitPoint, FitResidual,
    ParamEstimate, SqueezeFitResult,
};
pub use histogram::{histogram, sample_moments, Histogram, HistogramAccumulator, Moments};
pub use levels::{variance_level, LevelEstimate, VarianceAccumulator};
pub use report::{
    write_histogram_csv, write_json, write_spectrum_csv, write_sweep_csv, Versioned,
    SCHEMA_VERSION,
};
pub use spectrum::{
    averaged_fft, plateau, relative_level, FrequencyMask, PlateauStats, SpectrumAccumulator,
    SpectrumEstimate, Window,
};
pub use sweep::{loss_sweep, LossSweepRow, MonteCarloOptions};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("frequency grids differ")]
    Grid,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Signal(#[from] crate::signal::SignalError),
    #[error(transparent)]
    Gaussian(#[from] crate::gaussian::GaussianError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
