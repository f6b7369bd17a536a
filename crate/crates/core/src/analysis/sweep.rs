use serde::{Deserialize, Serialize};

use super::{AnalysisError, VarianceAccumulator};
use crate::gaussian::ChainModel;
use crate::seed::derive_seed;
use crate::signal::{psd_model, AcquisitionConfig, FrameSynthesizer, FrequencyResponse};

/// Trace-based estimates alongside the closed-form table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub acquisition: AcquisitionConfig,
    pub response: FrequencyResponse,
    pub seed: u64,
    /// Frames synthesized per batch.
    pub chunk: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSweepRow {
    pub gain_db: f64,
    pub added_loss: f64,
    pub squeezing_db_oracle: f64,
    pub squeezing_db_mc: Option<f64>,
    pub mc_err_db: Option<f64>,
}

/// Squeezing level against extra loss inserted after the amplifier, for each
/// amplifier gain. Levels are measured at the chain's LO phase.
pub fn loss_sweep(
    base: &ChainModel,
    added_loss: &[f64],
    gains_db: &[f64],
    mc: Option<&MonteCarloOptions>,
) -> Result<Vec<LossSweepRow>, AnalysisError> {
    if let Some(&bad) = added_loss.iter().find(|&&l| !(0.0..1.0).contains(&l)) {
        return Err(AnalysisError::Input(format!("added loss {bad} outside [0, 1)")));
    }
    let mut rows = Vec::with_capacity(added_loss.len() * gains_db.len());
    for &gain_db in gains_db {
        for &loss in added_loss {
            let chain = base.with_gain_db(gain_db)?.with_loss_after_amplifier(loss)?;
            let theta = chain.lo_phase();
            let mut row = LossSweepRow {
                gain_db,
                added_loss: loss,
                squeezing_db_oracle: chain.relative_level_db(theta),
                squeezing_db_mc: None,
                mc_err_db: None,
            };
            if let Some(opts) = mc {
                let tag = 2 * rows.len() as u64;
                let sig = frame_variances(&chain, opts, derive_seed(opts.seed, tag))?;
                let shot = frame_variances(&chain.shot_reference(), opts, derive_seed(opts.seed, tag + 1))?;
                let level = sig.level_against(&shot)?;
                row.squeezing_db_mc = Some(level.level_db);
                row.mc_err_db = Some(level.err_db);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

fn frame_variances(
    chain: &ChainModel,
    opts: &MonteCarloOptions,
    seed: u64,
) -> Result<VarianceAccumulator, AnalysisError> {
    let theta = chain.lo_phase();
    let model = psd_model(chain, &opts.response, &opts.acquisition, theta)?;
    let synth = FrameSynthesizer::new(&model, &opts.acquisition, theta)?;
    let mut acc = VarianceAccumulator::new();
    synth.for_each_chunk::<AnalysisError>(seed, opts.acquisition.frames, opts.chunk, |frames| {
        frames.iter().for_each(|f| acc.add(f));
        Ok(())
    })?;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::ChannelSpec;

    fn base() -> ChainModel {
        ChainModel::new(
            vec![
                ChannelSpec::Squeeze { r: 0.7 },
                ChannelSpec::Loss { eta: 0.9 },
                ChannelSpec::Psa { gain_db: 35.0, eta_opa: 0.8 },
                ChannelSpec::Loss { eta: 0.1 },
            ],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_added_loss_is_baseline() {
        let rows = loss_sweep(&base(), &[0.0], &[0.0, 35.0], None).unwrap();
        for r in &rows {
            let expect = base().with_gain_db(r.gain_db).unwrap().relative_level_db(0.0);
            assert!((r.squeezing_db_oracle - expect).abs() < 1e-12);
            assert!(r.squeezing_db_mc.is_none());
        }
    }

    #[test]
    fn gain_protects_against_loss() {
        let rows = loss_sweep(&base(), &[0.0, 0.5, 0.9], &[0.0, 35.0], None).unwrap();
        let d0 = rows[2].squeezing_db_oracle - rows[0].squeezing_db_oracle;
        let d35 = rows[5].squeezing_db_oracle - rows[3].squeezing_db_oracle;
        assert!(d35 < d0);
        assert!(rows.windows(2).take(2).all(|w| w[1].squeezing_db_oracle >= w[0].squeezing_db_oracle));
    }

    #[test]
    fn rejects_total_loss() {
        assert!(loss_sweep(&base(), &[1.0], &[0.0], None).is_err());
    }

    #[test]
    fn monte_carlo_tracks_oracle() {
        let acq = AcquisitionConfig {
            record_duration: 1024.0 * 6.25e-12,
            samples_per_frame: 1024,
            frames: 128,
            ..AcquisitionConfig::default()
        }
        .without_electrical_noise();
        let opts = MonteCarloOptions {
            acquisition: acq,
            response: FrequencyResponse::default(),
            seed: 17,
            chunk: 32,
        };
        let rows = loss_sweep(&base(), &[0.0, 0.9], &[0.0, 35.0], Some(&opts)).unwrap();
        for r in rows {
            let mc = r.squeezing_db_mc.unwrap();
            assert!((mc - r.squeezing_db_oracle).abs() < 4.0 * r.mc_err_db.unwrap(), "{r:?}");
        }
    }
}
