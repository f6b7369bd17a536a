//! Sideband-pair allocation of a squeezed band for parallel homodyne cores.
//!
//! Each pair is a lower and an upper channel mirrored about the carrier. All
//! frequencies are rounded to whole hertz before planning; channel centers
//! then fall on half-hertz values, which `f64` represents exactly at optical
//! frequencies, so the mirror symmetry holds without rounding error.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Measurement bandwidth of one homodyne core.
pub const DETECTION_BANDWIDTH_HZ: f64 = 43e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub carrier_hz: f64,
    pub spacing_hz: f64,
    pub width_hz: f64,
    pub source_bandwidth_hz: f64,
    /// Keep-out region on each side of the carrier.
    pub guard_hz: f64,
    /// Snap centers to whole multiples of the spacing from the carrier.
    pub grid_aligned: bool,
    pub detection_bandwidth_hz: f64,
}

impl Default for PlanParams {
    fn default() -> Self {
        Self {
            carrier_hz: 194.0e12,
            spacing_hz: 100e9,
            width_hz: 100e9,
            source_bandwidth_hz: 6e12,
            guard_hz: 0.0,
            grid_aligned: false,
            detection_bandwidth_hz: DETECTION_BANDWIDTH_HZ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WdmError {
    #[error("{name} = {value} Hz: {reason}")]
    Param {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("channel width {width} Hz exceeds spacing {spacing} Hz")]
    WidthExceedsSpacing { width: f64, spacing: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPair {
    pub index: usize,
    /// Center offset from the carrier.
    pub offset_hz: f64,
    pub lower_hz: f64,
    pub upper_hz: f64,
    pub width_hz: f64,
    /// Usable processing bandwidth, `min(width, detection bandwidth)`.
    pub clock_bandwidth_hz: f64,
}

impl BandPair {
    pub fn lower_edges(&self) -> (f64, f64) {
        (self.lower_hz - 0.5 * self.width_hz, self.lower_hz + 0.5 * self.width_hz)
    }

    pub fn upper_edges(&self) -> (f64, f64) {
        (self.upper_hz - 0.5 * self.width_hz, self.upper_hz + 0.5 * self.width_hz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPlan {
    pub carrier_hz: f64,
    pub spacing_hz: f64,
    pub width_hz: f64,
    pub source_bandwidth_hz: f64,
    pub guard_hz: f64,
    pub grid_aligned: bool,
    /// Ordered by increasing offset.
    pub pairs: Vec<BandPair>,
    /// Set when no pair fits.
    pub diagnostic: Option<String>,
}

impl BandPlan {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Every channel, lower and upper, sorted by frequency.
    pub fn channels(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .pairs
            .iter()
            .flat_map(|p| [p.lower_edges(), p.upper_edges()])
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Columns `pair_index, lower_hz, upper_hz, width_hz`.
    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["pair_index", "lower_hz", "upper_hz", "width_hz"])?;
        for p in &self.pairs {
            w.write_record([
                p.index.to_string(),
                p.lower_hz.to_string(),
                p.upper_hz.to_string(),
                p.width_hz.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check(name: &'static str, value: f64, allow_zero: bool) -> Result<(), WdmError> {
    let ok = value.is_finite() && (value > 0.0 || (allow_zero && value == 0.0));
    if ok {
        Ok(())
    } else {
        Err(WdmError::Param {
            name,
            value,
            reason: if allow_zero { "must be finite and >= 0" } else { "must be finite and > 0" },
        })
    }
}

pub fn plan_bands(params: &PlanParams) -> Result<BandPlan, WdmError> {
    check("carrier_hz", params.carrier_hz, false)?;
    check("spacing_hz", params.spacing_hz, false)?;
    check("width_hz", params.width_hz, false)?;
    check("source_bandwidth_hz", params.source_bandwidth_hz, true)?;
    check("guard_hz", params.guard_hz, true)?;
    check("detection_bandwidth_hz", params.detection_bandwidth_hz, false)?;

    let carrier = params.carrier_hz.round();
    let spacing = params.spacing_hz.round();
    let width = params.width_hz.round();
    let guard = params.guard_hz.round();
    let half_band = (0.5 * params.source_bandwidth_hz).floor();
    if spacing < 1.0 || width < 1.0 {
        return Err(WdmError::Param {
            name: if spacing < 1.0 { "spacing_hz" } else { "width_hz" },
            value: spacing.min(width),
            reason: "must be at least 1 Hz",
        });
    }
    if width > spacing {
        return Err(WdmError::WidthExceedsSpacing { width, spacing });
    }

    // Offsets of channel centers from the carrier, in half-hertz units so
    // everything stays integral.
    let offsets2: Vec<f64> = if params.grid_aligned {
        let k_min = ((guard + 0.5 * width) / spacing).ceil().max(1.0);
        let k_max = ((half_band - 0.5 * width) / spacing).floor();
        if k_max >= k_min {
            (k_min as u64..=k_max as u64).map(|k| 2.0 * k as f64 * spacing).collect()
        } else {
            Vec::new()
        }
    } else {
        let room = half_band - guard - width;
        if room >= 0.0 {
            let n = (room / spacing).floor() as u64 + 1;
            (0..n).map(|k| 2.0 * (guard + k as f64 * spacing) + width).collect()
        } else {
            Vec::new()
        }
    };

    // the divisions above can round across an integer boundary
    let pairs: Vec<BandPair> = offsets2
        .iter()
        .filter(|&&o2| o2 - width >= 2.0 * guard && o2 + width <= 2.0 * half_band)
        .enumerate()
        .map(|(index, &o2)| BandPair {
            index,
            offset_hz: 0.5 * o2,
            lower_hz: 0.5 * (2.0 * carrier - o2),
            upper_hz: 0.5 * (2.0 * carrier + o2),
            width_hz: width,
            clock_bandwidth_hz: width.min(params.detection_bandwidth_hz),
        })
        .collect();
    let diagnostic = pairs.is_empty().then(|| {
        format!(
            "no channel of width {width} Hz fits between guard {guard} Hz and half-bandwidth {half_band} Hz"
        )
    });
    Ok(BandPlan {
        carrier_hz: carrier,
        spacing_hz: spacing,
        width_hz: width,
        source_bandwidth_hz: params.source_bandwidth_hz,
        guard_hz: guard,
        grid_aligned: params.grid_aligned,
        pairs,
        diagnostic,
    })
}

/// Checks mirror symmetry, non-overlap and containment; returns the first
/// violation found.
pub fn verify_plan(plan: &BandPlan) -> Result<(), String> {
    let two_c = 2.0 * plan.carrier_hz;
    let half = 0.5 * plan.source_bandwidth_hz;
    for p in &plan.pairs {
        if p.lower_hz + p.upper_hz != two_c {
            return Err(format!("pair {} not symmetric", p.index));
        }
        let (lo, _) = p.lower_edges();
        let (_, hi) = p.upper_edges();
        if lo < plan.carrier_hz - half || hi > plan.carrier_hz + half {
            return Err(format!("pair {} outside the source band", p.index));
        }
        if p.offset_hz - 0.5 * p.width_hz < plan.guard_hz {
            return Err(format!("pair {} inside the guard", p.index));
        }
    }
    let ch = plan.channels();
    if let Some(i) = ch.windows(2).position(|w| w[0].1 > w[1].0) {
        return Err(format!("channels {i} and {} overlap", i + 1));
    }
    Ok(())
}
