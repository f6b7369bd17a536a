use super::{positive, SignalError, TraceRecord};

/// Sampled temporal mode function, stored as taps `f(tⱼ)·√Δt` with
/// `Σ taps² = 1`. Tap `j` sits at offset `(j − center)·Δt` from the
/// wavepacket center, `center = len / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    taps: Vec<f64>,
    sample_interval: f64,
}

impl ModeFunction {
    /// Gaussian envelope `exp(−t²/2σ²)` truncated at ±4σ.
    pub fn gaussian(sigma: f64, sample_interval: f64) -> Result<Self, SignalError> {
        positive("sigma", sigma)?;
        positive("sample_interval", sample_interval)?;
        let half = (4.0 * sigma / sample_interval).ceil() as i64;
        let values = (-half..=half)
            .map(|j| {
                let t = j as f64 * sample_interval;
                (-0.5 * (t / sigma).powi(2)).exp()
            })
            .collect();
        Self::from_samples(values, sample_interval)
    }

    /// Normalizes arbitrary samples onto the grid.
    pub fn from_samples(values: Vec<f64>, sample_interval: f64) -> Result<Self, SignalError> {
        positive("sample_interval", sample_interval)?;
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(SignalError::Config {
                name: "mode function norm",
                value: norm,
                reason: "must be positive and finite",
            });
        }
        Ok(Self {
            taps: values.into_iter().map(|v| v / norm).collect(),
            sample_interval,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn center(&self) -> usize {
        self.taps.len() / 2
    }

    /// `|Σ tapⱼ e^{−2πi f j Δt}|²`.
    pub fn power_transfer(&self, f: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f * self.sample_interval;
        let (mut re, mut im) = (0.0, 0.0);
        for (j, &t) in self.taps.iter().enumerate() {
            let (s, c) = (w * j as f64).sin_cos();
            re += t * c;
            im -= t * s;
        }
        re * re + im * im
    }
}

/// Quadrature sample of the wavepacket centered at `center_time` seconds
/// from the start of the frame.
pub fn extract_wavepacket(
    trace: &TraceRecord,
    mode: &ModeFunction,
    center_time: f64,
) -> Result<f64, SignalError> {
    let rel = (trace.sample_interval - mode.sample_interval).abs() / mode.sample_interval;
    if rel > 1e-9 {
        return Err(SignalError::IntervalMismatch {
            trace: trace.sample_interval,
            mode: mode.sample_interval,
        });
    }
    let c = (center_time / trace.sample_interval).round() as i64;
    let start = c - mode.center() as i64;
    let end = start + mode.taps.len() as i64;
    if start < 0 || end > trace.samples.len() as i64 {
        return Err(SignalError::Range {
            start,
            end,
            len: trace.samples.len(),
        });
    }
    Ok(trace.samples[start as usize..end as usize]
        .iter()
        .zip(&mode.taps)
        .map(|(x, t)| x * t)
        .sum())
}
