//! TOML experiment configuration. Key names carry their units.
//!
//! ```toml
//! seed = 1
//!
//! [chain]
//! lo_phase_rad = 0.0
//!
//! [[chain.stages]]
//! kind = "pumped_squeeze"
//! pump_mw = 438.0
//! a_per_w = 7.117
//!
//! [[chain.stages]]
//! kind = "loss"
//! eta = 0.9
//!
//! [acquisition]
//! frames = 1024
//! ```
//!
//! Every section and key is optional; missing values take the reference
//! setup defaults. TOML integers are signed, so `seed` must be below 2^63.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sqzhd::analysis::{Coupling, FitOptions, FrequencyMask, Window};
use sqzhd::gaussian::{squeeze_parameter, ChainModel, ChannelSpec};
use sqzhd::presets::ReferenceSetup;
use sqzhd::signal::{AcquisitionConfig, FilterShape, FrequencyResponse};
use sqzhd::wdm::PlanParams;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub chain: ChainConfig,
    pub acquisition: AcquisitionSection,
    pub response: ResponseSection,
    pub analysis: AnalysisSection,
    pub fit: FitSection,
    pub sweep: SweepSection,
    pub wdm: WdmSection,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            chain: ChainConfig::default(),
            acquisition: AcquisitionSection::default(),
            response: ResponseSection::default(),
            analysis: AnalysisSection::default(),
            fit: FitSection::default(),
            sweep: SweepSection::default(),
            wdm: WdmSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Validation(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageConfig {
    Squeeze { r: f64 },
    /// Squeezer driven at `pump_mw`, with `r = √(a·P)`.
    PumpedSqueeze { pump_mw: f64, a_per_w: f64 },
    Loss { eta: f64 },
    Phase { theta_rad: f64 },
    Psa { gain_db: f64, eta_opa: f64 },
}

impl StageConfig {
    pub fn to_channel(self) -> Result<ChannelSpec, CliError> {
        Ok(match self {
            StageConfig::Squeeze { r } => ChannelSpec::Squeeze { r },
            StageConfig::PumpedSqueeze { pump_mw, a_per_w } => {
                if !(pump_mw >= 0.0 && a_per_w > 0.0 && pump_mw.is_finite() && a_per_w.is_finite()) {
                    return Err(CliError::Validation(format!(
                        "pumped_squeeze needs pump_mw >= 0 and a_per_w > 0, got {pump_mw} and {a_per_w}"
                    )));
                }
                ChannelSpec::Squeeze {
                    r: squeeze_parameter(a_per_w, pump_mw * 1e-3),
                }
            }
            StageConfig::Loss { eta } => ChannelSpec::Loss { eta },
            StageConfig::Phase { theta_rad } => ChannelSpec::Phase { theta_rad },
            StageConfig::Psa { gain_db, eta_opa } => ChannelSpec::Psa { gain_db, eta_opa },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub lo_phase_rad: f64,
    pub stages: Vec<StageConfig>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        let s = ReferenceSetup::default();
        let eta_src = s
            .source_efficiency()
            .expect("reference setup is consistent");
        Self {
            lo_phase_rad: 0.0,
            stages: vec![
                StageConfig::PumpedSqueeze {
                    pump_mw: s.pump_w * 1e3,
                    a_per_w: s.a_coeff,
                },
                StageConfig::Loss { eta: eta_src },
                StageConfig::Phase { theta_rad: 0.0 },
                StageConfig::Psa {
                    gain_db: s.gain_db,
                    eta_opa: s.eta_opa,
                },
                StageConfig::Loss { eta: s.eta_hd },
            ],
        }
    }
}

impl ChainConfig {
    pub fn build(&self) -> Result<ChainModel, CliError> {
        let stages = self
            .stages
            .iter()
            .map(|s| s.to_channel())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChainModel::new(stages, self.lo_phase_rad)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionSection {
    pub record_duration_ns: f64,
    pub samples_per_frame: usize,
    pub frames: usize,
    pub photocurrent_ma: f64,
    pub electrical_noise: bool,
    pub clearance_at_43ghz_db: f64,
    pub electrical_slope_db_per_ghz: f64,
    /// Frames synthesized per batch.
    pub chunk_frames: usize,
}

impl Default for AcquisitionSection {
    fn default() -> Self {
        let a = AcquisitionConfig::default();
        Self {
            record_duration_ns: a.record_duration * 1e9,
            samples_per_frame: a.samples_per_frame,
            frames: a.frames,
            photocurrent_ma: a.photocurrent * 1e3,
            electrical_noise: true,
            clearance_at_43ghz_db: a.clearance_at_43ghz_db.unwrap_or(20.0),
            electrical_slope_db_per_ghz: a.electrical_slope_db_per_ghz,
            chunk_frames: 256,
        }
    }
}

impl AcquisitionSection {
    pub fn build(&self) -> Result<AcquisitionConfig, CliError> {
        let a = AcquisitionConfig {
            record_duration: self.record_duration_ns * 1e-9,
            samples_per_frame: self.samples_per_frame,
            frames: self.frames,
            photocurrent: self.photocurrent_ma * 1e-3,
            clearance_at_43ghz_db: self.electrical_noise.then_some(self.clearance_at_43ghz_db),
            electrical_slope_db_per_ghz: self.electrical_slope_db_per_ghz,
        };
        a.validate()?;
        if self.chunk_frames == 0 {
            return Err(CliError::Validation("chunk_frames must be at least 1".into()));
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Butterworth,
    BrickWall,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponseSection {
    pub detector_f3db_ghz: f64,
    pub detector_shape: ShapeKind,
    pub detector_order: u32,
    pub scope_cutoff_ghz: f64,
    pub scope_shape: ShapeKind,
    pub scope_order: u32,
}

impl Default for ResponseSection {
    fn default() -> Self {
        Self {
            detector_f3db_ghz: 43.0,
            detector_shape: ShapeKind::Butterworth,
            detector_order: 4,
            scope_cutoff_ghz: 63.0,
            scope_shape: ShapeKind::BrickWall,
            scope_order: 4,
        }
    }
}

fn shape(kind: ShapeKind, order: u32) -> FilterShape {
    match kind {
        ShapeKind::Butterworth => FilterShape::Butterworth { order },
        ShapeKind::BrickWall => FilterShape::BrickWall,
        ShapeKind::Flat => FilterShape::Flat,
    }
}

impl ResponseSection {
    pub fn build(&self) -> Result<FrequencyResponse, CliError> {
        let r = FrequencyResponse {
            detector_f3db: self.detector_f3db_ghz * 1e9,
            detector_shape: shape(self.detector_shape, self.detector_order),
            scope_cutoff: self.scope_cutoff_ghz * 1e9,
            scope_shape: shape(self.scope_shape, self.scope_order),
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub window: Window,
    pub mask_centers_ghz: Vec<f64>,
    pub mask_width_ghz: f64,
    pub plateau_low_ghz: f64,
    pub plateau_high_ghz: f64,
    pub rbw_ghz: f64,
    pub histogram_bins: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            window: Window::Rectangular,
            mask_centers_ghz: vec![34.0],
            mask_width_ghz: 1.0,
            plateau_low_ghz: 0.0,
            plateau_high_ghz: 43.0,
            rbw_ghz: 1.0,
            histogram_bins: 101,
        }
    }
}

impl AnalysisSection {
    pub fn mask(&self) -> FrequencyMask {
        let centers: Vec<f64> = self.mask_centers_ghz.iter().map(|c| c * 1e9).collect();
        FrequencyMask::around(&centers, self.mask_width_ghz * 1e9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub coupling: Coupling,
    pub max_iterations: usize,
    pub l_starts: Vec<f64>,
    /// Used for rows whose `sigma_db` column is empty.
    pub default_sigma_db: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        let f = FitOptions::default();
        Self {
            coupling: f.coupling,
            max_iterations: f.max_iterations,
            l_starts: f.l_starts,
            default_sigma_db: 0.1,
        }
    }
}

impl FitSection {
    pub fn options(&self) -> FitOptions {
        FitOptions {
            coupling: self.coupling,
            max_iterations: self.max_iterations,
            l_starts: self.l_starts.clone(),
            ..FitOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub added_loss: Vec<f64>,
    pub gains_db: Vec<f64>,
    pub monte_carlo: bool,
    /// Frames per point for the Monte Carlo estimate.
    pub mc_frames: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            added_loss: (0..=9).map(|i| i as f64 / 10.0).collect(),
            gains_db: vec![0.0, 35.0],
            monte_carlo: false,
            mc_frames: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WdmSection {
    pub carrier_thz: f64,
    pub spacing_ghz: f64,
    /// Defaults to the spacing.
    pub width_ghz: Option<f64>,
    pub source_bandwidth_thz: f64,
    pub guard_ghz: f64,
    pub grid_aligned: bool,
    pub detection_bandwidth_ghz: f64,
}

impl Default for WdmSection {
    fn default() -> Self {
        Self {
            carrier_thz: 194.0,
            spacing_ghz: 100.0,
            width_ghz: None,
            source_bandwidth_thz: 6.0,
            guard_ghz: 0.0,
            grid_aligned: false,
            detection_bandwidth_ghz: 43.0,
        }
    }
}

impl WdmSection {
    pub fn params(&self) -> PlanParams {
        PlanParams {
            carrier_hz: self.carrier_thz * 1e12,
            spacing_hz: self.spacing_ghz * 1e9,
            width_hz: self.width_ghz.unwrap_or(self.spacing_ghz) * 1e9,
            source_bandwidth_hz: self.source_bandwidth_thz * 1e12,
            guard_hz: self.guard_ghz * 1e9,
            grid_aligned: self.grid_aligned,
            detection_bandwidth_hz: self.detection_bandwidth_ghz * 1e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Traces are also written as CSV when they hold at most this many
    /// samples in total.
    pub csv_max_samples: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv_max_samples: 100_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_chain_is_reference_setup() {
        let chain = ExperimentConfig::default().chain.build().unwrap();
        let want = ReferenceSetup::default().squeezing_chain().unwrap();
        assert!((chain.relative_level_db(0.0) - want.relative_level_db(0.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_text_is_default() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_key_rejected() {
        let e = ExperimentConfig::parse("[acquisition]\nframez = 3\n").unwrap_err();
        assert!(matches!(e, CliError::Validation(_)));
    }

    #[test]
    fn stage_table_syntax() {
        let c = ExperimentConfig::parse(
            "[chain]\nlo_phase_rad = 0.5\n[[chain.stages]]\nkind = \"squeeze\"\nr = 0.3\n[[chain.stages]]\nkind = \"loss\"\neta = 0.5\n",
        )
        .unwrap();
        let chain = c.chain.build().unwrap();
        assert_eq!(chain.stages().len(), 2);
        assert_eq!(chain.lo_phase(), 0.5);
    }

    #[test]
    fn bad_stage_fails_validation() {
        let c = ExperimentConfig::parse("[[chain.stages]]\nkind = \"loss\"\neta = 1.5\n").unwrap();
        assert!(matches!(c.chain.build(), Err(CliError::Validation(_))));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6f64..1e6, Just(0.0), 1e-12f64..1e-3]
    }

    fn arb_stage() -> impl Strategy<Value = StageConfig> {
        prop_oneof![
            finite().prop_map(|r| StageConfig::Squeeze { r }),
            (finite(), finite()).prop_map(|(pump_mw, a_per_w)| StageConfig::PumpedSqueeze { pump_mw, a_per_w }),
            finite().prop_map(|eta| StageConfig::Loss { eta }),
            finite().prop_map(|theta_rad| StageConfig::Phase { theta_rad }),
            (finite(), finite()).prop_map(|(gain_db, eta_opa)| StageConfig::Psa { gain_db, eta_opa }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn toml_round_trip(
            seed in 0..=i64::MAX as u64,
            phase in finite(),
            stages in prop::collection::vec(arb_stage(), 0..6),
            frames in 1usize..100_000,
            electrical in any::<bool>(),
            clearance in finite(),
            losses in prop::collection::vec(0.0f64..1.0, 0..5),
            width in prop::option::of(finite()),
            grid in any::<bool>(),
            window in prop_oneof![Just(Window::Rectangular), Just(Window::Hann)],
        ) {
            let mut c = ExperimentConfig { seed, ..ExperimentConfig::default() };
            c.chain = ChainConfig { lo_phase_rad: phase, stages };
            c.acquisition.frames = frames;
            c.acquisition.electrical_noise = electrical;
            c.acquisition.clearance_at_43ghz_db = clearance;
            c.sweep.added_loss = losses;
            c.wdm.width_ghz = width;
            c.wdm.grid_aligned = grid;
            c.analysis.window = window;
            let text = c.to_toml().unwrap();
            prop_assert_eq!(ExperimentConfig::parse(&text).unwrap(), c);
        }
    }
}
