use serde::{Deserialize, Serialize};

use super::{linear_to_db, ChannelSpec, GaussianError, GaussianState};

/// Ordered stages from source to detector plus the local-oscillator phase.
///
/// The input is always vacuum; squeezed light enters through a
/// [`ChannelSpec::Squeeze`] stage. The shot-noise reference of a chain is the
/// same chain with its squeezers switched off.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct ChainModel {
    stages: Vec<ChannelSpec>,
    lo_phase: f64,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    #[serde(default)]
    lo_phase_rad: f64,
    #[serde(default)]
    stages: Vec<ChannelSpec>,
}

impl TryFrom<RawChain> for ChainModel {
    type Error = GaussianError;

    fn try_from(raw: RawChain) -> Result<Self, Self::Error> {
        ChainModel::new(raw.stages, raw.lo_phase_rad)
    }
}

impl From<ChainModel> for RawChain {
    fn from(c: ChainModel) -> Self {
        RawChain {
            lo_phase_rad: c.lo_phase,
            stages: c.stages,
        }
    }
}

impl ChainModel {
    pub fn new(stages: Vec<ChannelSpec>, lo_phase: f64) -> Result<Self, GaussianError> {
        for s in &stages {
            s.validate()?;
        }
        if !lo_phase.is_finite() {
            return Err(GaussianError::Domain {
                name: "lo_phase",
                value: lo_phase,
                range: "finite reals",
            });
        }
        Ok(Self { stages, lo_phase })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn stages(&self) -> &[ChannelSpec] {
        &self.stages
    }

    pub fn lo_phase(&self) -> f64 {
        self.lo_phase
    }

    pub fn propagate(&self, input: &GaussianState) -> GaussianState {
        self.stages.iter().fold(*input, |s, stage| stage.map(&s))
    }

    pub fn output_state(&self) -> GaussianState {
        self.propagate(&GaussianState::vacuum())
    }

    /// Homodyne variance at the chain's own LO phase.
    pub fn variance(&self) -> f64 {
        homodyne_variance(self, self.lo_phase)
    }

    pub fn shot_reference(&self) -> ChainModel {
        ChainModel {
            stages: self
                .stages
                .iter()
                .filter(|s| !s.is_squeezer())
                .copied()
                .collect(),
            lo_phase: self.lo_phase,
        }
    }

    /// Variance at `theta` divided by the shot-noise reference variance.
    pub fn relative_variance(&self, theta: f64) -> f64 {
        homodyne_variance(self, theta) / homodyne_variance(&self.shot_reference(), theta)
    }

    pub fn relative_level_db(&self, theta: f64) -> f64 {
        linear_to_db(self.relative_variance(theta))
    }

    pub fn with_lo_phase(&self, theta: f64) -> Self {
        Self {
            stages: self.stages.clone(),
            lo_phase: theta,
        }
    }

    /// Sets the gain of every amplifier stage.
    pub fn with_gain_db(&self, gain_db: f64) -> Result<Self, GaussianError> {
        let stages = self
            .stages
            .iter()
            .map(|s| match *s {
                ChannelSpec::Psa { eta_opa, .. } => ChannelSpec::Psa { gain_db, eta_opa },
                other => other,
            })
            .collect();
        Self::new(stages, self.lo_phase)
    }

    /// Inserts an extra loss stage right after the last amplifier, or at the
    /// end of the chain if there is none.
    pub fn with_loss_after_amplifier(&self, added_loss: f64) -> Result<Self, GaussianError> {
        let eta = 1.0 - added_loss;
        let at = self
            .stages
            .iter()
            .rposition(ChannelSpec::is_amplifier)
            .map_or(self.stages.len(), |i| i + 1);
        let mut stages = self.stages.clone();
        stages.insert(at, ChannelSpec::Loss { eta });
        Self::new(stages, self.lo_phase)
    }

    /// Sets the phase between the signal and the first amplifier's gain axis.
    ///
    /// Replaces the last phase stage that precedes the first amplifier, or
    /// inserts one just before it. Without an amplifier the phase stage is
    /// appended, which is then equivalent to moving the LO.
    pub fn with_signal_phase(&self, theta: f64) -> Result<Self, GaussianError> {
        let first_amp = self
            .stages
            .iter()
            .position(ChannelSpec::is_amplifier)
            .unwrap_or(self.stages.len());
        let mut stages = self.stages.clone();
        let phase = ChannelSpec::Phase { theta_rad: theta };
        match stages[..first_amp]
            .iter()
            .rposition(|s| matches!(s, ChannelSpec::Phase { .. }))
        {
            Some(i) => stages[i] = phase,
            None => stages.insert(first_amp, phase),
        }
        Self::new(stages, self.lo_phase)
    }
}

/// `Var(X cosθ + P sinθ)` of the chain output for vacuum input.
pub fn homodyne_variance(chain: &ChainModel, theta: f64) -> f64 {
    chain.output_state().quadrature_variance(theta)
}
