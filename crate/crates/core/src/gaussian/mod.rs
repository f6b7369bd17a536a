//! Single-mode Gaussian quadrature statistics and the channels that make up
//! an amplified homodyne measurement chain.
//!
//! Quadratures follow `X = (A + A†)/√2`, `P = (A − A†)/(√2 i)`, so the vacuum
//! has `Var(X) = Var(P) = 1/2`. Every relative level reported elsewhere in the
//! crate is a ratio against that shot-noise variance.

mod chain;
mod channel;
mod formulas;
mod state;

pub use chain::{homodyne_variance, ChainModel};
pub use channel::{apply_loss, apply_phase, apply_psa, apply_squeeze, ChannelSpec};
pub use formulas::{
    db_to_linear, effective_efficiency, linear_to_db, post_amplifier_loss, pump_curve,
    squeeze_parameter, squeezing_floor_db, Branch, PumpCurveModel, PumpParams,
};
pub use state::{vacuum, GaussianState, VACUUM_VARIANCE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("covariance violates the uncertainty bound (det = {det}, need >= 1/4)")]
    Unphysical { det: f64 },
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<(), GaussianError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(GaussianError::Domain {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_gain_db(value: f64) -> Result<(), GaussianError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(GaussianError::Domain {
            name: "gain_db",
            value,
            range: "[0, inf)",
        })
    }
}
