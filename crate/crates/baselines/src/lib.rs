//! Classical blind source separation baselines and their evaluation.
//!
//! * [`fastica_separate`]: FastICA over a Hankel (time-delay) embedding.
//! * [`nmf_separate`]: magnitude-STFT NMF with Wiener-ratio masks.
//! * [`evaluate_baseline`]: permutation-invariant scoring over a corpus
//!   test split.

pub mod evaluate;
pub mod fastica;
pub mod hankel;
pub mod nmf;
pub mod stft;

pub use evaluate::{
    evaluate_baseline, evaluate_corpus, EvalOptions, GeneratedCorpus, Method, SampleSource,
};
pub use fastica::{fastica_separate, IcaOutput};
pub use hankel::{hankel_embed, HankelFrames};
pub use nmf::{nmf_separate, NmfOutput};
pub use stft::{istft, stft, StftGrid};

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Core(#[from] rfss_core::Error),
    #[error(transparent)]
    Io(#[from] rfss_io::IoError),
}

pub type Result<T> = std::result::Result<T, BaselineError>;

pub(crate) fn check_sources(k: usize) -> Result<()> {
    if !(1..=rfss_core::MAX_SOURCES).contains(&k) {
        return Err(BaselineError::Parameter(format!(
            "number of sources must be in 1..={}, got {k}",
            rfss_core::MAX_SOURCES
        )));
    }
    Ok(())
}
