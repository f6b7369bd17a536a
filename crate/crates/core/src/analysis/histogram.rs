use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::signal::TraceRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Fixed-range histogram fed in chunks. Values outside the range are
/// clamped into the end bins so that counts always add up to the samples seen.
#[derive(Debug, Clone)]
pub struct HistogramAccumulator {
    lo: f64,
    width: f64,
    counts: Vec<u64>,
}

impl HistogramAccumulator {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self, AnalysisError> {
        if bins < 2 {
            return Err(AnalysisError::Input(format!("need at least 2 bins, got {bins}")));
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(AnalysisError::Input("histogram range must be finite".into()));
        }
        // a degenerate range still gets bins of nonzero width
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Ok(Self {
            lo,
            width: (hi - lo) / bins as f64,
            counts: vec![0; bins],
        })
    }

    pub fn add(&mut self, xs: &[f64]) {
        let last = self.counts.len() - 1;
        for &x in xs {
            let b = ((x - self.lo) / self.width).floor();
            let i = if b < 0.0 { 0 } else { (b as usize).min(last) };
            self.counts[i] += 1;
        }
    }

    pub fn finish(self) -> Histogram {
        let n = self.counts.len();
        Histogram {
            edges: (0..=n).map(|i| self.lo + i as f64 * self.width).collect(),
            counts: self.counts,
        }
    }
}

/// Histogram of all samples of all frames over their full range.
pub fn histogram(frames: &[TraceRecord], bins: usize) -> Result<Histogram, AnalysisError> {
    let (lo, hi) = frames
        .iter()
        .flat_map(|f| f.samples.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let mut acc = HistogramAccumulator::new(bins, lo, hi)?;
    for f in frames {
        acc.add(&f.samples);
    }
    Ok(acc.finish())
}

/// Sample moments accumulated in one pass (Pébay's update formulas).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let t1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += t1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += t1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += t1;
    }

    pub fn extend(&mut self, xs: &[f64]) {
        xs.iter().for_each(|&x| self.push(x));
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        self.m2 / self.count as f64
    }

    pub fn skewness(&self) -> f64 {
        let n = self.count as f64;
        n.sqrt() * self.m3 / self.m2.powf(1.5)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        let n = self.count as f64;
        n * self.m4 / (self.m2 * self.m2) - 3.0
    }
}

pub fn sample_moments(frames: &[TraceRecord]) -> Moments {
    let mut m = Moments::default();
    for f in frames {
        m.extend(&f.samples);
    }
    m
}
