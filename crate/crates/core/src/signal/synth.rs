//! Frequency-domain synthesis of Gaussian traces with a prescribed PSD.
//!
//! Each frame is drawn on a circular grid of twice the frame length: complex
//! Gaussian bins scaled by `√S(f)` are inverse-transformed and the first half
//! of the result is kept, so the kept samples do not see the wrap-around.

use std::ops::Range;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner};

use super::{psd_model, AcquisitionConfig, FrequencyResponse, PsdModel, SignalError, TraceRecord};
use crate::gaussian::ChainModel;
use crate::seed::frame_rng;

pub struct FrameSynthesizer {
    /// `√(M·S_k/2)` for `k = 0..=M/2` on the doubled grid of length `M`.
    amplitudes: Vec<f64>,
    fft: Arc<dyn ComplexToReal<f64>>,
    samples: usize,
    sample_interval: f64,
    theta: f64,
}

impl FrameSynthesizer {
    pub fn new(model: &PsdModel, acq: &AcquisitionConfig, theta: f64) -> Result<Self, SignalError> {
        acq.validate()?;
        let n = acq.samples_per_frame;
        let m = 2 * n;
        let dt = acq.sample_interval();
        let df = 1.0 / (m as f64 * dt);
        let amplitudes = (0..=m / 2)
            .map(|k| (0.5 * m as f64 * model.total(k as f64 * df)).sqrt())
            .collect();
        let fft = RealFftPlanner::new().plan_fft_inverse(m);
        Ok(Self {
            amplitudes,
            fft,
            samples: n,
            sample_interval: dt,
            theta,
        })
    }

    pub fn samples_per_frame(&self) -> usize {
        self.samples
    }

    /// Frame `index` of the stream seeded by `seed`. Bit-identical for equal
    /// arguments regardless of call order or thread.
    pub fn frame(&self, seed: u64, index: u64) -> TraceRecord {
        let m = 2 * self.samples;
        let half = m / 2;
        let mut rng = frame_rng(seed, index);
        let mut spec = vec![Complex64::new(0.0, 0.0); half + 1];
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        spec[0] = Complex64::new(self.amplitudes[0] * normal(), 0.0);
        for k in 1..half {
            let a = self.amplitudes[k] * std::f64::consts::FRAC_1_SQRT_2;
            spec[k] = Complex64::new(a * normal(), a * normal());
        }
        spec[half] = Complex64::new(self.amplitudes[half] * normal(), 0.0);

        let mut out = vec![0.0; m];
        let mut scratch = self.fft.make_scratch_vec();
        self.fft
            .process_with_scratch(&mut spec, &mut out, &mut scratch)
            .expect("buffer lengths match the plan and edge bins are real");
        let scale = 1.0 / m as f64;
        TraceRecord {
            samples: out[..self.samples].iter().map(|x| x * scale).collect(),
            sample_interval: self.sample_interval,
            theta: self.theta,
            seed,
            frame_index: index,
        }
    }

    /// Frames for a range of indices, generated in parallel and returned in
    /// index order.
    pub fn frames(&self, seed: u64, indices: Range<u64>) -> Vec<TraceRecord> {
        indices
            .into_par_iter()
            .map(|i| self.frame(seed, i))
            .collect()
    }

    /// Visits `count` frames in index order, `chunk` at a time.
    pub fn for_each_chunk<E>(
        &self,
        seed: u64,
        count: usize,
        chunk: usize,
        mut f: impl FnMut(&[TraceRecord]) -> Result<(), E>,
    ) -> Result<(), E> {
        let chunk = chunk.max(1) as u64;
        let count = count as u64;
        let mut start = 0;
        while start < count {
            let end = (start + chunk).min(count);
            f(&self.frames(seed, start..end))?;
            start = end;
        }
        Ok(())
    }
}

/// One frame (stream index 0) for the given chain and LO phase.
pub fn synthesize_frame(
    chain: &ChainModel,
    resp: &FrequencyResponse,
    acq: &AcquisitionConfig,
    theta: f64,
    seed: u64,
) -> Result<TraceRecord, SignalError> {
    let model = psd_model(chain, resp, acq, theta)?;
    Ok(FrameSynthesizer::new(&model, acq, theta)?.frame(seed, 0))
}

/// `acq.frames` frames, indices `0..frames`.
pub fn synthesize_frames(
    chain: &ChainModel,
    resp: &FrequencyResponse,
    acq: &AcquisitionConfig,
    theta: f64,
    seed: u64,
) -> Result<Vec<TraceRecord>, SignalError> {
    let model = psd_model(chain, resp, acq, theta)?;
    Ok(FrameSynthesizer::new(&model, acq, theta)?.frames(seed, 0..acq.frames as u64))
}
