use serde::{Deserialize, Serialize};

use super::{positive, FrequencyResponse, SignalError};
use crate::gaussian::db_to_linear;

/// Photocurrent at which trace units are calibrated (shot noise = 1/2 per
/// sample) and at which the electrical clearance is specified.
pub const REFERENCE_PHOTOCURRENT_A: f64 = 3.0e-3;

/// Frequency at which the shot-to-electrical clearance is specified.
pub const CLEARANCE_REFERENCE_HZ: f64 = 43e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    /// Seconds per frame.
    pub record_duration: f64,
    pub samples_per_frame: usize,
    pub frames: usize,
    /// Amperes per photodiode.
    pub photocurrent: f64,
    /// Shot noise over electrical floor at 43 GHz and the reference
    /// photocurrent; `None` disables electrical noise.
    pub clearance_at_43ghz_db: Option<f64>,
    /// Tilt of the electrical floor around 43 GHz. Zero gives a flat floor.
    pub electrical_slope_db_per_ghz: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            record_duration: 78.2e-9,
            samples_per_frame: 12512,
            frames: 8192,
            photocurrent: REFERENCE_PHOTOCURRENT_A,
            clearance_at_43ghz_db: Some(20.0),
            electrical_slope_db_per_ghz: 0.0,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        positive("record_duration", self.record_duration)?;
        positive("photocurrent", self.photocurrent)?;
        if self.samples_per_frame < 2 {
            return Err(SignalError::Config {
                name: "samples_per_frame",
                value: self.samples_per_frame as f64,
                reason: "need at least 2 samples",
            });
        }
        if self.frames == 0 {
            return Err(SignalError::Config {
                name: "frames",
                value: 0.0,
                reason: "need at least 1 frame",
            });
        }
        if let Some(c) = self.clearance_at_43ghz_db {
            if !c.is_finite() {
                return Err(SignalError::Config {
                    name: "clearance_at_43ghz_db",
                    value: c,
                    reason: "must be finite",
                });
            }
        }
        if !self.electrical_slope_db_per_ghz.is_finite() {
            return Err(SignalError::Config {
                name: "electrical_slope_db_per_ghz",
                value: self.electrical_slope_db_per_ghz,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    pub fn sample_interval(&self) -> f64 {
        self.record_duration / self.samples_per_frame as f64
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.sample_interval()
    }

    pub fn nyquist(&self) -> f64 {
        0.5 * self.sample_rate()
    }

    /// Shot-noise power relative to the reference photocurrent.
    pub fn shot_scale(&self) -> f64 {
        self.photocurrent / REFERENCE_PHOTOCURRENT_A
    }

    pub fn without_electrical_noise(&self) -> Self {
        Self {
            clearance_at_43ghz_db: None,
            ..self.clone()
        }
    }

    pub fn electrical_floor(&self, resp: &FrequencyResponse) -> Option<ElectricalFloor> {
        self.clearance_at_43ghz_db.map(|clearance| ElectricalFloor {
            level_at_reference: resp.power_gain(CLEARANCE_REFERENCE_HZ) / db_to_linear(clearance),
            slope_db_per_ghz: self.electrical_slope_db_per_ghz,
        })
    }
}

/// Electrical noise PSD in relative shot-noise units. It is not shaped by
/// the detector response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectricalFloor {
    pub level_at_reference: f64,
    pub slope_db_per_ghz: f64,
}

impl ElectricalFloor {
    pub fn level(&self, f: f64) -> f64 {
        if self.slope_db_per_ghz == 0.0 {
            self.level_at_reference
        } else {
            let dg = (f - CLEARANCE_REFERENCE_HZ) * 1e-9;
            self.level_at_reference * db_to_linear(self.slope_db_per_ghz * dg)
        }
    }
}
