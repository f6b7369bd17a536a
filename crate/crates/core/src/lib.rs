//! Simulation and analysis of broadband homodyne measurements of squeezed
//! light with a phase-sensitive optical pre-amplifier.
//!
//! - [`gaussian`]: quadrature moments, channels and closed-form efficiencies.
//! - [`signal`]: detector frequency response, time-domain trace synthesis,
//!   trace files and wavepacket extraction.
//! - [`analysis`]: averaged spectra, squeezing levels, histograms, pump-power
//!   fits and loss sweeps.
//! - [`wdm`]: sideband-pair frequency planning for multi-core operation.
//! - [`presets`]: the reference operating point (35 dB amplifier, 43 GHz
//!   detector, 438 mW source pump).

pub mod analysis;
pub mod gaussian;
pub mod numeric;
pub mod presets;
pub mod seed;
pub mod signal;
pub mod wdm;
