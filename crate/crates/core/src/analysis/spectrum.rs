use std::sync::Arc;

use rayon::prelude::*;
use realfft::{RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::gaussian::linear_to_db;
use crate::signal::TraceRecord;

/// One-sided PSD on a uniform grid, in units where white vacuum noise at the
/// reference photocurrent is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    /// Hz, strictly increasing.
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub frames_averaged: usize,
    /// Shot-noise spectrum this one was normalized against, if any.
    pub reference: Option<Box<SpectrumEstimate>>,
}

impl SpectrumEstimate {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn power_db(&self) -> Vec<f64> {
        self.power.iter().map(|&p| linear_to_db(p)).collect()
    }

    pub fn resolution(&self) -> f64 {
        if self.freqs.len() < 2 {
            0.0
        } else {
            self.freqs[1] - self.freqs[0]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|j| {
                    let x = std::f64::consts::PI * j as f64 / n as f64;
                    x.sin().powi(2)
                })
                .collect(),
        }
    }
}

/// Running power average of per-frame periodograms.
///
/// Frames may be added one at a time or in batches; batch periodograms are
/// computed in parallel but always summed in frame order, so the result does
/// not depend on the thread count.
pub struct SpectrumAccumulator {
    n: usize,
    sample_interval: f64,
    window: Vec<f64>,
    /// `2 / Σw²`
    scale: f64,
    fft: Arc<dyn RealToComplex<f64>>,
    sum: Vec<f64>,
    frames: usize,
}

impl SpectrumAccumulator {
    pub fn new(samples: usize, sample_interval: f64, window: Window) -> Result<Self, AnalysisError> {
        if samples < 2 {
            return Err(AnalysisError::Input("need at least 2 samples per frame".into()));
        }
        if !(sample_interval > 0.0 && sample_interval.is_finite()) {
            return Err(AnalysisError::Input(format!(
                "sample interval {sample_interval} must be positive"
            )));
        }
        let window = window.coefficients(samples);
        let scale = 2.0 / window.iter().map(|w| w * w).sum::<f64>();
        Ok(Self {
            n: samples,
            sample_interval,
            window,
            scale,
            fft: RealFftPlanner::new().plan_fft_forward(samples),
            sum: vec![0.0; samples / 2 + 1],
            frames: 0,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    fn check(&self, frame: &TraceRecord) -> Result<(), AnalysisError> {
        if frame.samples.len() != self.n {
            return Err(AnalysisError::Shape(format!(
                "frame {} has {} samples, expected {}",
                frame.frame_index,
                frame.samples.len(),
                self.n
            )));
        }
        if (frame.sample_interval - self.sample_interval).abs() > 1e-9 * self.sample_interval {
            return Err(AnalysisError::Shape(format!(
                "frame {} sample interval {} differs from {}",
                frame.frame_index, frame.sample_interval, self.sample_interval
            )));
        }
        Ok(())
    }

    fn periodogram(&self, samples: &[f64]) -> Vec<f64> {
        let mut input: Vec<f64> = samples.iter().zip(&self.window).map(|(&x, &w)| x * w).collect();
        let mut spec = self.fft.make_output_vec();
        self.fft
            .process(&mut input, &mut spec)
            .expect("buffer lengths match the plan");
        spec.iter().map(|c| c.norm_sqr() * self.scale).collect()
    }

    pub fn add(&mut self, frame: &TraceRecord) -> Result<(), AnalysisError> {
        self.check(frame)?;
        let p = self.periodogram(&frame.samples);
        self.accumulate(&p);
        Ok(())
    }

    pub fn add_batch(&mut self, frames: &[TraceRecord]) -> Result<(), AnalysisError> {
        for f in frames {
            self.check(f)?;
        }
        let parts: Vec<Vec<f64>> = frames
            .par_iter()
            .map(|f| self.periodogram(&f.samples))
            .collect();
        for p in &parts {
            self.accumulate(p);
        }
        Ok(())
    }

    fn accumulate(&mut self, p: &[f64]) {
        for (s, v) in self.sum.iter_mut().zip(p) {
            *s += v;
        }
        self.frames += 1;
    }

    pub fn finish(&self) -> Result<SpectrumEstimate, AnalysisError> {
        if self.frames == 0 {
            return Err(AnalysisError::Input("no frames accumulated".into()));
        }
        let df = 1.0 / (self.n as f64 * self.sample_interval);
        let k = self.frames as f64;
        Ok(SpectrumEstimate {
            freqs: (0..self.sum.len()).map(|i| i as f64 * df).collect(),
            power: self.sum.iter().map(|s| s / k).collect(),
            frames_averaged: self.frames,
            reference: None,
        })
    }
}

/// Power-averaged periodogram over `frames`.
pub fn averaged_fft(frames: &[TraceRecord], window: Window) -> Result<SpectrumEstimate, AnalysisError> {
    let first = frames
        .first()
        .ok_or_else(|| AnalysisError::Input("need at least one frame".into()))?;
    let mut acc = SpectrumAccumulator::new(first.samples.len(), first.sample_interval, window)?;
    acc.add_batch(frames)?;
    acc.finish()
}

/// Bin-wise `signal / shot` with `shot` attached as the reference.
pub fn relative_level(
    signal: &SpectrumEstimate,
    shot: &SpectrumEstimate,
) -> Result<SpectrumEstimate, AnalysisError> {
    if signal.freqs != shot.freqs || signal.power.len() != shot.power.len() {
        return Err(AnalysisError::Grid);
    }
    if let Some(i) = shot.power.iter().position(|&p| !(p > 0.0)) {
        return Err(AnalysisError::Numeric(format!(
            "shot reference is {} at {} Hz",
            shot.power[i], shot.freqs[i]
        )));
    }
    Ok(SpectrumEstimate {
        freqs: signal.freqs.clone(),
        power: signal
            .power
            .iter()
            .zip(&shot.power)
            .map(|(s, r)| s / r)
            .collect(),
        frames_averaged: signal.frames_averaged.min(shot.frames_averaged),
        reference: Some(Box::new(SpectrumEstimate {
            reference: None,
            ..shot.clone()
        })),
    })
}

/// Frequency windows excluded from plateau statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMask {
    /// `(low_hz, high_hz)` closed intervals.
    pub excluded: Vec<(f64, f64)>,
}

impl Default for FrequencyMask {
    /// Excludes 1 GHz around 34 GHz, where the scope shows a spurious peak.
    fn default() -> Self {
        Self::around(&[34e9], 1e9)
    }
}

impl FrequencyMask {
    pub fn none() -> Self {
        Self { excluded: Vec::new() }
    }

    pub fn around(centers: &[f64], width: f64) -> Self {
        Self {
            excluded: centers
                .iter()
                .map(|&c| (c - 0.5 * width, c + 0.5 * width))
                .collect(),
        }
    }

    pub fn contains(&self, f: f64) -> bool {
        self.excluded.iter().any(|&(lo, hi)| f >= lo && f <= hi)
    }
}

/// Summary of a relative spectrum over a band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauStats {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub resolution_bandwidth_hz: f64,
    pub bins_used: usize,
    /// Linear mean over all unmasked bins, in dB.
    pub mean_db: f64,
    /// Extremes over resolution-bandwidth blocks.
    pub min_block_db: f64,
    pub max_block_db: f64,
}

impl PlateauStats {
    /// Largest deviation of any block from `target_db`.
    pub fn max_deviation_from(&self, target_db: f64) -> f64 {
        (self.min_block_db - target_db)
            .abs()
            .max((self.max_block_db - target_db).abs())
    }
}

/// Plateau statistics of `spectrum` over `[low, high]`, skipping masked bins.
/// Blocks are formed by averaging unmasked bins in consecutive
/// `rbw`-wide slices starting at `low`.
pub fn plateau(
    spectrum: &SpectrumEstimate,
    low: f64,
    high: f64,
    mask: &FrequencyMask,
    rbw: f64,
) -> Result<PlateauStats, AnalysisError> {
    if !(high > low && rbw > 0.0) {
        return Err(AnalysisError::Input(format!(
            "bad band [{low}, {high}] or resolution {rbw}"
        )));
    }
    let mut total = 0.0;
    let mut used = 0usize;
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    let mut current: Option<usize> = None;
    for (&f, &p) in spectrum.freqs.iter().zip(&spectrum.power) {
        if f < low || f > high || mask.contains(f) {
            continue;
        }
        total += p;
        used += 1;
        let b = ((f - low) / rbw).floor() as usize;
        if current != Some(b) {
            blocks.push((0.0, 0));
            current = Some(b);
        }
        let last = blocks.last_mut().expect("block pushed above");
        last.0 += p;
        last.1 += 1;
    }
    if used == 0 {
        return Err(AnalysisError::Input("no unmasked bins in band".into()));
    }
    let block_db: Vec<f64> = blocks
        .iter()
        .map(|&(s, n)| linear_to_db(s / n as f64))
        .collect();
    let mean = total / used as f64;
    if !(mean > 0.0) {
        return Err(AnalysisError::Numeric(format!("plateau mean {mean} is not positive")));
    }
    Ok(PlateauStats {
        band_low_hz: low,
        band_high_hz: high,
        resolution_bandwidth_hz: rbw,
        bins_used: used,
        mean_db: linear_to_db(mean),
        min_block_db: block_db.iter().copied().fold(f64::INFINITY, f64::min),
        max_block_db: block_db.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
