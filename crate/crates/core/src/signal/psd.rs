use super::{AcquisitionConfig, ElectricalFloor, FrequencyResponse, SignalError};
use crate::analysis::SpectrumEstimate;
use crate::gaussian::{homodyne_variance, ChainModel, VACUUM_VARIANCE};
use crate::numeric::simpson;

const INTEGRATION_INTERVALS: usize = 20_000;

/// Analytic one-sided PSD of the detector output, relative to vacuum shot
/// noise at the reference photocurrent:
///
/// `S(f) = |H(f)|²·shot_scale·V_rel + S_el(f)`.
#[derive(Debug, Clone)]
pub struct PsdModel {
    relative_variance: f64,
    shot_scale: f64,
    response: FrequencyResponse,
    electrical: Option<ElectricalFloor>,
    nyquist: f64,
}

pub fn psd_model(
    chain: &ChainModel,
    resp: &FrequencyResponse,
    acq: &AcquisitionConfig,
    theta: f64,
) -> Result<PsdModel, SignalError> {
    PsdModel::new(homodyne_variance(chain, theta) / VACUUM_VARIANCE, resp, acq)
}

impl PsdModel {
    /// `relative_variance` is the optical quadrature variance over 1/2.
    pub fn new(
        relative_variance: f64,
        resp: &FrequencyResponse,
        acq: &AcquisitionConfig,
    ) -> Result<Self, SignalError> {
        resp.validate()?;
        acq.validate()?;
        if !(relative_variance > 0.0 && relative_variance.is_finite()) {
            return Err(SignalError::Config {
                name: "relative_variance",
                value: relative_variance,
                reason: "must be positive and finite",
            });
        }
        Ok(Self {
            relative_variance,
            shot_scale: acq.shot_scale(),
            response: *resp,
            electrical: acq.electrical_floor(resp),
            nyquist: acq.nyquist(),
        })
    }

    pub fn relative_variance(&self) -> f64 {
        self.relative_variance
    }

    pub fn nyquist(&self) -> f64 {
        self.nyquist
    }

    pub fn response(&self) -> &FrequencyResponse {
        &self.response
    }

    /// Vacuum shot-noise contribution at this photocurrent.
    pub fn shot(&self, f: f64) -> f64 {
        self.response.power_gain(f) * self.shot_scale
    }

    pub fn optical(&self, f: f64) -> f64 {
        self.shot(f) * self.relative_variance
    }

    pub fn electrical(&self, f: f64) -> f64 {
        self.electrical.map_or(0.0, |e| e.level(f))
    }

    pub fn total(&self, f: f64) -> f64 {
        self.optical(f) + self.electrical(f)
    }

    /// `∫₀^{f_max} S(f) df`, split at any response discontinuity.
    pub fn integral(&self, f_max: f64) -> f64 {
        let mut edges = vec![0.0];
        edges.extend(
            self.response
                .discontinuities()
                .into_iter()
                .filter(|&f| f > 0.0 && f < f_max),
        );
        edges.push(f_max);
        edges
            .windows(2)
            .map(|w| simpson(|f| self.total(f), w[0], w[1], INTEGRATION_INTERVALS))
            .sum()
    }

    /// Expected per-sample variance of a synthesized trace.
    pub fn sample_variance(&self) -> f64 {
        0.5 * self.integral(self.nyquist) / self.nyquist
    }

    pub fn curve(&self, freqs: &[f64]) -> SpectrumEstimate {
        SpectrumEstimate {
            freqs: freqs.to_vec(),
            power: freqs.iter().map(|&f| self.total(f)).collect(),
            frames_averaged: 0,
            reference: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{linear_to_db, ChannelSpec};

    #[test]
    fn vacuum_over_shot_is_unity_without_floor() {
        let acq = AcquisitionConfig::default().without_electrical_noise();
        let m = psd_model(&ChainModel::empty(), &FrequencyResponse::default(), &acq, 0.7).unwrap();
        for f in [0.0, 1e9, 20e9, 43e9, 60e9] {
            assert_eq!(m.total(f), m.shot(f));
        }
    }

    #[test]
    fn photocurrent_scales_shot_noise() {
        let resp = FrequencyResponse::default();
        let hi = AcquisitionConfig::default();
        let lo = AcquisitionConfig {
            photocurrent: 1.5e-3,
            ..hi.clone()
        };
        let a = psd_model(&ChainModel::empty(), &resp, &hi, 0.0).unwrap();
        let b = psd_model(&ChainModel::empty(), &resp, &lo, 0.0).unwrap();
        for f in [0.0, 10e9, 43e9] {
            assert!((linear_to_db(a.shot(f) / b.shot(f)) - 3.0103).abs() < 1e-4);
        }
    }

    #[test]
    fn twenty_db_clearance_at_43ghz() {
        let m = psd_model(
            &ChainModel::empty(),
            &FrequencyResponse::default(),
            &AcquisitionConfig::default(),
            0.0,
        )
        .unwrap();
        assert!((linear_to_db(m.shot(43e9) / m.electrical(43e9)) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn flat_white_vacuum_has_half_variance() {
        let acq = AcquisitionConfig::default().without_electrical_noise();
        let m = psd_model(&ChainModel::empty(), &FrequencyResponse::flat(), &acq, 0.0).unwrap();
        assert!((m.sample_variance() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn squeezed_chain_scales_optical_part() {
        let chain = ChainModel::new(vec![ChannelSpec::Squeeze { r: 0.5 }], 0.0).unwrap();
        let acq = AcquisitionConfig::default();
        let m = psd_model(&chain, &FrequencyResponse::default(), &acq, 0.0).unwrap();
        assert!((m.relative_variance() - (-1.0f64).exp()).abs() < 1e-15);
    }
}
