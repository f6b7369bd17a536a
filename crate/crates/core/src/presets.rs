//! The reference operating point: a 438 mW squeezer pump, 29% total loss,
//! a 35 dB amplifier with 79% efficiency ahead of a detector with 7.6%
//! transmission, and a 43 GHz detector.
//!
//! The total loss fixes `L = 0.29`. The pump coefficient `a` is then set so
//! that the anti-squeezing branch reaches 13.9 dB at the reference pump; the
//! squeezing branch comes out at 5.08 dB. The efficiency left over for the
//! source, `(1 − L) / η_eff`, is placed in a loss stage right after the
//! squeezer.

use serde::{Deserialize, Serialize};

use crate::gaussian::{
    db_to_linear, effective_efficiency, squeeze_parameter, ChainModel, ChannelSpec, GaussianError,
    PumpParams,
};
use crate::signal::{AcquisitionConfig, FrequencyResponse};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSetup {
    pub big_l: f64,
    /// Per watt.
    pub a_coeff: f64,
    pub pump_w: f64,
    pub gain_db: f64,
    pub eta_opa: f64,
    pub eta_hd: f64,
}

/// `a` such that `R₊(pump_w) = anti_db` for the given `L`.
pub fn a_for_anti_squeezing(big_l: f64, pump_w: f64, anti_db: f64) -> f64 {
    let u = (db_to_linear(anti_db) - big_l) / (1.0 - big_l);
    (0.5 * u.ln()).powi(2) / pump_w
}

impl Default for ReferenceSetup {
    fn default() -> Self {
        Self {
            big_l: 0.29,
            a_coeff: a_for_anti_squeezing(0.29, 0.438, 13.9),
            pump_w: 0.438,
            gain_db: 35.0,
            eta_opa: 0.79,
            eta_hd: 0.076,
        }
    }
}

impl ReferenceSetup {
    pub fn pump_params(&self) -> Result<PumpParams, GaussianError> {
        PumpParams::new(self.big_l, self.a_coeff)
    }

    pub fn effective_efficiency(&self) -> Result<f64, GaussianError> {
        effective_efficiency(self.eta_opa, self.eta_hd, self.gain_db)
    }

    /// Transmission between the squeezer and the amplifier.
    pub fn source_efficiency(&self) -> Result<f64, GaussianError> {
        let eta = (1.0 - self.big_l) / self.effective_efficiency()?;
        if eta > 1.0 {
            return Err(GaussianError::Domain {
                name: "source efficiency",
                value: eta,
                range: "[0, 1]",
            });
        }
        Ok(eta)
    }

    /// Chain at pump power `pump_w` with the squeezed quadrature on the
    /// amplifier's gain axis (`signal_phase = 0`). `π/2` puts the
    /// anti-squeezed quadrature there instead.
    pub fn chain_at(&self, pump_w: f64, signal_phase: f64) -> Result<ChainModel, GaussianError> {
        ChainModel::new(
            vec![
                ChannelSpec::Squeeze {
                    r: squeeze_parameter(self.a_coeff, pump_w),
                },
                ChannelSpec::Loss {
                    eta: self.source_efficiency()?,
                },
                ChannelSpec::Phase {
                    theta_rad: signal_phase,
                },
                ChannelSpec::Psa {
                    gain_db: self.gain_db,
                    eta_opa: self.eta_opa,
                },
                ChannelSpec::Loss { eta: self.eta_hd },
            ],
            0.0,
        )
    }

    pub fn squeezing_chain(&self) -> Result<ChainModel, GaussianError> {
        self.chain_at(self.pump_w, 0.0)
    }

    pub fn anti_squeezing_chain(&self) -> Result<ChainModel, GaussianError> {
        self.chain_at(self.pump_w, std::f64::consts::FRAC_PI_2)
    }

    pub fn response(&self) -> FrequencyResponse {
        FrequencyResponse::default()
    }

    pub fn acquisition(&self) -> AcquisitionConfig {
        AcquisitionConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{pump_curve, Branch};

    #[test]
    fn chain_reproduces_pump_curve() {
        let s = ReferenceSetup::default();
        for p in [0.0, 0.1, 0.25, 0.438] {
            let sq = s.chain_at(p, 0.0).unwrap().relative_variance(0.0);
            let anti = s.chain_at(p, std::f64::consts::FRAC_PI_2).unwrap().relative_variance(0.0);
            let want_sq = pump_curve(p, s.big_l, s.a_coeff, Branch::Squeezing).unwrap();
            let want_anti = pump_curve(p, s.big_l, s.a_coeff, Branch::AntiSqueezing).unwrap();
            assert!((sq / want_sq - 1.0).abs() < 1e-9, "{sq} vs {want_sq}");
            assert!((anti / want_anti - 1.0).abs() < 1e-9, "{anti} vs {want_anti}");
        }
    }

    #[test]
    fn reference_levels() {
        let s = ReferenceSetup::default();
        let anti = s.anti_squeezing_chain().unwrap().relative_level_db(0.0);
        let sq = s.squeezing_chain().unwrap().relative_level_db(0.0);
        assert!((anti - 13.9).abs() < 1e-9);
        assert!((sq + 5.2).abs() < 0.5, "{sq}");
        assert!((s.a_coeff - 7.117).abs() < 1e-3, "{}", s.a_coeff);
    }
}
