use serde::{Deserialize, Serialize};

use super::{positive, SignalError};

/// Magnitude model of one low-pass element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FilterShape {
    /// `|H|² = 1 / (1 + (f/fc)^{2n})`; `fc` is the 3-dB point.
    Butterworth { order: u32 },
    /// Unity up to and including `fc`, zero above.
    BrickWall,
    Flat,
}

impl FilterShape {
    pub fn power_gain(&self, f: f64, corner: f64) -> f64 {
        let f = f.abs();
        match *self {
            FilterShape::Butterworth { order } => {
                1.0 / (1.0 + (f / corner).powi(2 * order as i32))
            }
            FilterShape::BrickWall => {
                if f <= corner {
                    1.0
                } else {
                    0.0
                }
            }
            FilterShape::Flat => 1.0,
        }
    }

    fn is_discontinuous(&self) -> bool {
        matches!(self, FilterShape::BrickWall)
    }
}

/// Combined response of balanced detector, amplifier and oscilloscope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    /// Hz.
    pub detector_f3db: f64,
    pub detector_shape: FilterShape,
    /// Hz.
    pub scope_cutoff: f64,
    pub scope_shape: FilterShape,
}

impl Default for FrequencyResponse {
    fn default() -> Self {
        Self {
            detector_f3db: 43e9,
            detector_shape: FilterShape::Butterworth { order: 4 },
            scope_cutoff: 63e9,
            scope_shape: FilterShape::BrickWall,
        }
    }
}

impl FrequencyResponse {
    pub fn flat() -> Self {
        Self {
            detector_shape: FilterShape::Flat,
            scope_shape: FilterShape::Flat,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        positive("detector_f3db", self.detector_f3db)?;
        positive("scope_cutoff", self.scope_cutoff)?;
        for shape in [self.detector_shape, self.scope_shape] {
            if let FilterShape::Butterworth { order: 0 } = shape {
                return Err(SignalError::Config {
                    name: "filter order",
                    value: 0.0,
                    reason: "must be at least 1",
                });
            }
        }
        Ok(())
    }

    /// `|H(f)|²`, normalized to 1 at DC.
    pub fn power_gain(&self, f: f64) -> f64 {
        self.detector_shape.power_gain(f, self.detector_f3db)
            * self.scope_shape.power_gain(f, self.scope_cutoff)
    }

    pub fn magnitude(&self, f: f64) -> f64 {
        self.power_gain(f).sqrt()
    }

    /// Frequencies where `|H|` jumps, for piecewise integration.
    pub(crate) fn discontinuities(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if self.detector_shape.is_discontinuous() {
            out.push(self.detector_f3db);
        }
        if self.scope_shape.is_discontinuous() {
            out.push(self.scope_cutoff);
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_response_anchors() {
        let h = FrequencyResponse::default();
        assert_eq!(h.power_gain(0.0), 1.0);
        assert!((h.power_gain(43e9) - 0.5).abs() < 0.005);
        assert_eq!(h.power_gain(63.5e9), 0.0);
        // falls well below the passband at the scope edge
        assert!(h.power_gain(63e9) < 0.5);
    }

    #[test]
    fn butterworth_is_monotone() {
        let h = FrequencyResponse::default();
        let mut prev = h.power_gain(0.0);
        for i in 1..1000 {
            let g = h.power_gain(i as f64 * 1e8);
            assert!(g <= prev);
            prev = g;
        }
    }

    #[test]
    fn zero_order_rejected() {
        let h = FrequencyResponse {
            detector_shape: FilterShape::Butterworth { order: 0 },
            ..FrequencyResponse::default()
        };
        assert!(h.validate().is_err());
    }
}
