use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::gaussian::linear_to_db;
use crate::signal::TraceRecord;

const DB_PER_NEPER_POWER: f64 = 10.0 / std::f64::consts::LN_10;

/// Squeezing level from time-domain variances, with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEstimate {
    pub level_db: f64,
    pub err_db: f64,
    pub signal_variance: f64,
    pub shot_variance: f64,
    pub signal_frames: usize,
    pub shot_frames: usize,
}

/// Streaming mean and spread of per-frame variances.
#[derive(Debug, Clone, Default)]
pub struct VarianceAccumulator {
    count: usize,
    mean: f64,
    m2: f64,
}

impl VarianceAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, frame: &TraceRecord) {
        self.push(frame_variance(&frame.samples));
    }

    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean variance.
    pub fn standard_error(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        (self.m2 / (n - 1.0) / n).sqrt()
    }

    /// Level of `self` (signal) against `shot`.
    pub fn level_against(&self, shot: &VarianceAccumulator) -> Result<LevelEstimate, AnalysisError> {
        if self.count < 2 || shot.count < 2 {
            return Err(AnalysisError::Input(format!(
                "need at least 2 frames each, got {} and {}",
                self.count, shot.count
            )));
        }
        if !(self.mean > 0.0 && shot.mean > 0.0) {
            return Err(AnalysisError::Numeric(format!(
                "degenerate variance: signal {}, shot {}",
                self.mean, shot.mean
            )));
        }
        let rs = self.standard_error() / self.mean;
        let rn = shot.standard_error() / shot.mean;
        Ok(LevelEstimate {
            level_db: linear_to_db(self.mean / shot.mean),
            err_db: DB_PER_NEPER_POWER * (rs * rs + rn * rn).sqrt(),
            signal_variance: self.mean,
            shot_variance: shot.mean,
            signal_frames: self.count,
            shot_frames: shot.count,
        })
    }
}

/// Unbiased variance about the frame mean.
fn frame_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// `10·log10(⟨var_signal⟩ / ⟨var_shot⟩)` over frames, with the error
/// propagated from the frame-to-frame scatter of both ensembles.
pub fn variance_level(
    frames: &[TraceRecord],
    shot_frames: &[TraceRecord],
) -> Result<LevelEstimate, AnalysisError> {
    let mut s = VarianceAccumulator::new();
    frames.iter().for_each(|f| s.add(f));
    let mut n = VarianceAccumulator::new();
    shot_frames.iter().for_each(|f| n.add(f));
    s.level_against(&n)
}
