//! Distributed compressed wideband spectrum sensing.
//!
//! `K` low-rate nodes each mix the wideband input with a pseudorandom ±1
//! chip waveform, low-pass filter and sample at the subband rate `B`. A
//! fusion center stacks the `K` aliased samples, recovers the nonnegative
//! per-subband levels by basis-pursuit denoising and thresholds them into
//! busy/idle decisions.
//!
//! ```
//! use dcws_core::harness::{run_trial, ExperimentConfig, NoiseSpec, SpectrumSpec};
//!
//! let cfg = ExperimentConfig {
//!     spectrum: SpectrumSpec { total_bandwidth_hz: 31.0, subband_bandwidth_hz: 1.0 },
//!     pu_count: 2,
//!     nodes: vec![16],
//!     noise: NoiseSpec::SigmaW(0.0),
//!     ..Default::default()
//! };
//! let spectrum = cfg.validate().unwrap();
//! let trial = run_trial(&cfg, &spectrum, 16, 0, 1e-3).unwrap();
//! assert_eq!(trial.outcome.counts.pd(), Some(1.0));
//! ```

pub mod error;
pub mod fusion;
pub mod harness;
pub mod metrics;
pub mod sampler;
pub mod seed;
pub mod spectrum;

pub use error::{Error, Result};
