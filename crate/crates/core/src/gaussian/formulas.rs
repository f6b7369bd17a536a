//! Closed-form efficiency and pump-power relations.

use serde::{Deserialize, Serialize};

use super::{check_gain_db, GaussianError};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Overall transmissivity of an amplifier (gain `gain_db`, internal
/// efficiency `eta_opa`) followed by a detector of efficiency `eta_hd`:
///
/// `η_eff = η_OPA·η_HD / (η_HD + (1 − η_HD)/G)`.
///
/// Tends to `eta_opa` as the gain grows and to `eta_opa·eta_hd` at 0 dB.
pub fn effective_efficiency(eta_opa: f64, eta_hd: f64, gain_db: f64) -> Result<f64, GaussianError> {
    check_efficiency("eta_opa", eta_opa)?;
    check_efficiency("eta_hd", eta_hd)?;
    check_gain_db(gain_db)?;
    Ok(eta_opa * suppressed_efficiency(eta_hd, gain_db))
}

/// Loss seen after the amplifier once the gain has been applied:
/// `1 − η_HD / (η_HD + (1 − η_HD)/G)`.
pub fn post_amplifier_loss(eta_hd: f64, gain_db: f64) -> Result<f64, GaussianError> {
    check_efficiency("eta_hd", eta_hd)?;
    check_gain_db(gain_db)?;
    Ok(1.0 - suppressed_efficiency(eta_hd, gain_db))
}

fn suppressed_efficiency(eta_hd: f64, gain_db: f64) -> f64 {
    let g = db_to_linear(gain_db);
    let denom = eta_hd + (1.0 - eta_hd) / g;
    if denom == 0.0 {
        0.0
    } else {
        eta_hd / denom
    }
}

fn check_efficiency(name: &'static str, value: f64) -> Result<(), GaussianError> {
    super::check_unit_interval(name, value)
}

/// Which quadrature the pump-power curve describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    AntiSqueezing,
    Squeezing,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::AntiSqueezing => 1.0,
            Branch::Squeezing => -1.0,
        }
    }
}

/// `R±(P) = L + (1 − L)·exp(±2√(a·P))`, a noise power relative to shot noise.
pub fn pump_curve(pump_w: f64, big_l: f64, a_coeff: f64, branch: Branch) -> Result<f64, GaussianError> {
    PumpParams::new(big_l, a_coeff)?.level(pump_w, branch)
}

/// Squeezing parameter produced by pump power `pump_w`: `r = √(a·P)`.
pub fn squeeze_parameter(a_coeff: f64, pump_w: f64) -> f64 {
    (a_coeff * pump_w).sqrt()
}

/// Asymptotic squeezing level in dB (positive number) for total loss `L`.
pub fn squeezing_floor_db(big_l: f64) -> f64 {
    -linear_to_db(big_l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpParams {
    pub big_l: f64,
    /// Per watt.
    pub a_coeff: f64,
}

impl PumpParams {
    pub fn new(big_l: f64, a_coeff: f64) -> Result<Self, GaussianError> {
        if !(0.0..1.0).contains(&big_l) {
            return Err(GaussianError::Domain {
                name: "big_l",
                value: big_l,
                range: "[0, 1)",
            });
        }
        if !(a_coeff > 0.0 && a_coeff.is_finite()) {
            return Err(GaussianError::Domain {
                name: "a_coeff",
                value: a_coeff,
                range: "(0, inf)",
            });
        }
        Ok(Self { big_l, a_coeff })
    }

    pub fn level(&self, pump_w: f64, branch: Branch) -> Result<f64, GaussianError> {
        if !(pump_w >= 0.0 && pump_w.is_finite()) {
            return Err(GaussianError::Domain {
                name: "pump_w",
                value: pump_w,
                range: "[0, inf)",
            });
        }
        let r = squeeze_parameter(self.a_coeff, pump_w);
        Ok(self.big_l + (1.0 - self.big_l) * (2.0 * branch.sign() * r).exp())
    }
}

/// Pump-power model with either one `(L, a)` pair for both quadratures or a
/// separate pair per branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coupling", rename_all = "snake_case")]
pub enum PumpCurveModel {
    Shared(PumpParams),
    Independent { anti: PumpParams, squeeze: PumpParams },
}

impl PumpCurveModel {
    pub fn params(&self, branch: Branch) -> PumpParams {
        match (*self, branch) {
            (PumpCurveModel::Shared(p), _) => p,
            (PumpCurveModel::Independent { anti, .. }, Branch::AntiSqueezing) => anti,
            (PumpCurveModel::Independent { squeeze, .. }, Branch::Squeezing) => squeeze,
        }
    }

    pub fn level(&self, pump_w: f64, branch: Branch) -> Result<f64, GaussianError> {
        self.params(branch).level(pump_w, branch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn post_amplifier_loss_ninety_percent_detector() {
        let loss = post_amplifier_loss(0.10, 35.0).unwrap();
        assert!((loss - 0.003).abs() < 0.0005, "loss = {loss}");
    }

    #[test]
    fn system_efficiency_at_measured_detector_loss() {
        let eff = effective_efficiency(0.79, 0.076, 35.0).unwrap();
        assert!((eff - 0.787).abs() < 0.001, "eff = {eff}");
        let loss = post_amplifier_loss(0.076, 35.0).unwrap();
        assert!((loss - 0.004).abs() < 0.0005, "loss = {loss}");
    }

    #[test]
    fn high_gain_limit() {
        let eff = effective_efficiency(0.79, 0.076, 200.0).unwrap();
        assert!((eff - 0.79).abs() < 1e-12);
    }

    #[test]
    fn zero_detector_efficiency_is_graceful() {
        assert_eq!(effective_efficiency(0.79, 0.0, 35.0).unwrap(), 0.0);
        assert!(effective_efficiency(-0.1, 0.5, 35.0).is_err());
        assert!(effective_efficiency(0.5, -0.5, 35.0).is_err());
        assert!(effective_efficiency(0.5, 0.5, -3.0).is_err());
    }

    #[test]
    fn pump_curve_limits() {
        for b in [Branch::AntiSqueezing, Branch::Squeezing] {
            assert_eq!(pump_curve(0.0, 0.29, 7.0, b).unwrap(), 1.0);
        }
        let far = pump_curve(1e4, 0.29, 7.0, Branch::Squeezing).unwrap();
        assert!((far - 0.29).abs() < 1e-12);
        assert!((squeezing_floor_db(0.29) - 5.376).abs() < 1e-3);
        assert!(pump_curve(0.1, 1.0, 7.0, Branch::Squeezing).is_err());
        assert!(pump_curve(0.1, 0.2, 0.0, Branch::Squeezing).is_err());
        assert!(pump_curve(-0.1, 0.2, 1.0, Branch::Squeezing).is_err());
    }

    #[test]
    fn independent_model_selects_branch() {
        let m = PumpCurveModel::Independent {
            anti: PumpParams::new(0.2, 5.0).unwrap(),
            squeeze: PumpParams::new(0.3, 8.0).unwrap(),
        };
        let anti = m.level(0.4, Branch::AntiSqueezing).unwrap();
        let sq = m.level(0.4, Branch::Squeezing).unwrap();
        assert_eq!(anti, pump_curve(0.4, 0.2, 5.0, Branch::AntiSqueezing).unwrap());
        assert_eq!(sq, pump_curve(0.4, 0.3, 8.0, Branch::Squeezing).unwrap());
    }

    proptest! {
        #[test]
        fn efficiency_nondecreasing_in_gain(
            eta_opa in 0.01..=1.0f64,
            eta_hd in 0.001..=1.0f64,
            g1 in 0.0..60.0f64,
            dg in 0.0..30.0f64,
        ) {
            let lo = effective_efficiency(eta_opa, eta_hd, g1).unwrap();
            let hi = effective_efficiency(eta_opa, eta_hd, g1 + dg).unwrap();
            prop_assert!(hi >= lo * (1.0 - 1e-14));
            let at_zero = effective_efficiency(eta_opa, eta_hd, 0.0).unwrap();
            prop_assert!((at_zero - eta_opa * eta_hd).abs() < 1e-14);
        }

        #[test]
        fn lossless_branches_are_reciprocal(p in 0.0..2.0f64, a in 0.01..20.0f64) {
            let plus = pump_curve(p, 0.0, a, Branch::AntiSqueezing).unwrap();
            let minus = pump_curve(p, 0.0, a, Branch::Squeezing).unwrap();
            prop_assert!((plus * minus - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lossy_branches_exceed_pure_state(p in 0.0..2.0f64, l in 0.0..0.99f64, a in 0.01..20.0f64) {
            let plus = pump_curve(p, l, a, Branch::AntiSqueezing).unwrap();
            let minus = pump_curve(p, l, a, Branch::Squeezing).unwrap();
            prop_assert!(plus * minus >= 1.0 - 1e-12);
        }
    }
}
