//! Synthesis engine and evaluation primitives for multi-standard RF
//! source-separation corpora.
//!
//! The crate generates GSM, UMTS, LTE and NR baseband waveforms at a common
//! 30.72 MHz rate, passes each through a fading channel and a hardware
//! impairment chain, mixes them co-channel or adjacent-channel, and scores
//! separated estimates with permutation-invariant SI-SINR.

pub mod channel;
pub mod dsp;
pub mod error;
pub mod impairments;
pub mod iq;
pub mod metrics;
pub mod mixer;
pub mod rng;
pub mod waveforms;

pub use error::{Error, Result};
pub use iq::IqBuffer;
pub use num_complex::Complex64;
pub use rng::{derive_stream, SeedContext, StreamTag};

/// Common sample rate of every generated signal.
pub const CORPUS_RATE_HZ: f64 = 30.72e6;
/// Samples per corpus row (4 ms at 30.72 MHz).
pub const SAMPLE_LEN: usize = 122_880;
/// Maximum number of sources in one mixture.
pub const MAX_SOURCES: usize = 4;
