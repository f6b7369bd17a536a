use serde::{Deserialize, Serialize};

use super::formulas::db_to_linear;
use super::{check_gain_db, check_unit_interval, GaussianError, GaussianState};

/// One stage of the measurement chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    /// Squeezes X by `e^{-r}` and stretches P by `e^{r}`. Negative `r`
    /// squeezes P instead.
    Squeeze { r: f64 },
    /// Pure loss with transmissivity `eta`.
    Loss { eta: f64 },
    /// Phase delay: the new X is the old `X cosθ + P sinθ`.
    Phase { theta_rad: f64 },
    /// Phase-sensitive amplifier: internal loss `1 − eta_opa`, then noiseless
    /// gain `G = 10^{gain_db/10}` on X (and `1/G` on P).
    Psa { gain_db: f64, eta_opa: f64 },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<(), GaussianError> {
        match *self {
            ChannelSpec::Squeeze { r } => finite("r", r),
            ChannelSpec::Loss { eta } => check_unit_interval("eta", eta),
            ChannelSpec::Phase { theta_rad } => finite("theta_rad", theta_rad),
            ChannelSpec::Psa { gain_db, eta_opa } => {
                check_gain_db(gain_db)?;
                check_unit_interval("eta_opa", eta_opa)
            }
        }
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState, GaussianError> {
        self.validate()?;
        Ok(self.map(state))
    }

    /// Applies an already validated stage.
    pub(crate) fn map(&self, s: &GaussianState) -> GaussianState {
        match *self {
            ChannelSpec::Squeeze { r } => {
                let e = (-r).exp();
                s.linear_map([[e, 0.0], [0.0, 1.0 / e]])
            }
            ChannelSpec::Loss { eta } => s.attenuate(eta),
            ChannelSpec::Phase { theta_rad } => {
                let (sn, c) = theta_rad.sin_cos();
                s.linear_map([[c, sn], [-sn, c]])
            }
            ChannelSpec::Psa { gain_db, eta_opa } => {
                let amp = db_to_linear(gain_db).sqrt();
                s.attenuate(eta_opa)
                    .linear_map([[amp, 0.0], [0.0, 1.0 / amp]])
            }
        }
    }

    pub fn is_squeezer(&self) -> bool {
        matches!(self, ChannelSpec::Squeeze { .. })
    }

    pub fn is_amplifier(&self) -> bool {
        matches!(self, ChannelSpec::Psa { .. })
    }
}

fn finite(name: &'static str, value: f64) -> Result<(), GaussianError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(GaussianError::Domain {
            name,
            value,
            range: "finite reals",
        })
    }
}

pub fn apply_squeeze(s: &GaussianState, r: f64) -> GaussianState {
    ChannelSpec::Squeeze { r }.map(s)
}

pub fn apply_loss(s: &GaussianState, eta: f64) -> Result<GaussianState, GaussianError> {
    ChannelSpec::Loss { eta }.apply(s)
}

pub fn apply_phase(s: &GaussianState, theta: f64) -> GaussianState {
    ChannelSpec::Phase { theta_rad: theta }.map(s)
}

pub fn apply_psa(
    s: &GaussianState,
    gain_db: f64,
    eta_opa: f64,
) -> Result<GaussianState, GaussianError> {
    ChannelSpec::Psa { gain_db, eta_opa }.apply(s)
}
