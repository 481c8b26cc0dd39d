//! Acoustic metamaterial defense toolkit.
//!
//! Numerical models for Helmholtz-like resonator arrays with mutual-impedance
//! coupling, coiled-space amplifiers, and enclosure-level composite responses,
//! plus signal-level synthesis and scoring of inaudible / adversarial
//! voice-assistant attacks against those defenses.
//!
//! The crate is organized around a small set of value types:
//!
//! * [`spectral::Signal`] / [`spectral::FrequencyResponse`] — waveforms and
//!   complex transfer functions, with FFT-based filtering.
//! * [`resonator::ResonatorUnit`] / [`coupling::ArrayConfig`] — a single
//!   quarter-wave resonator unit and an arranged, spaced collection of them.
//! * [`amplifier::CoiledUnit`] — the coiled-channel amplifier.
//! * [`device::EnclosurePreset`] — mobile / speaker enclosure models that
//!   compose the above into a full device response.
//! * [`attacks`] / [`metrics`] — attack synthesis, microphone capture, and
//!   the PSR / WIR / CRR scoring surrogates.
//!
//! All operations are pure functions over immutable values; batch evaluation
//! is data-parallel when the `parallel` feature (default) is enabled and
//! bit-identical to the sequential fallback.

pub mod amplifier;
pub mod attacks;
pub mod config;
pub mod coupling;
pub mod designer;
pub mod device;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod resonator;
pub mod spectral;

pub use error::{Error, Result};
