//! Command implementations behind the `rfss` binary.

pub mod characterize;
pub mod config;
pub mod evaluate;
pub mod generate;

use std::path::Path;

use rfss_io::CorpusReader;
use serde_json::json;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("estimates misaligned with corpus at sample index {index}: {reason}")]
    Misaligned { index: u64, reason: String },
    #[error("cancelled after {0} samples; the corpus was finalized with the rows written")]
    Cancelled(usize),
    #[error(transparent)]
    Io(#[from] rfss_io::IoError),
    #[error(transparent)]
    Core(#[from] rfss_core::Error),
    #[error(transparent)]
    Baseline(#[from] rfss_baselines::BaselineError),
}

/// Metadata JSON of one row, or a description of the corpus when `row` is
/// `None`.
pub fn inspect(path: &Path, row: Option<usize>) -> Result<String, CliError> {
    let reader = CorpusReader::open(path)?;
    match row {
        Some(r) => {
            let raw = reader.read_metadata_json(r)?;
            let value: serde_json::Value = serde_json::from_str(&raw)
                .map_err(|e| rfss_io::IoError::Corrupt(format!("metadata of row {r}: {e}")))?;
            Ok(serde_json::to_string_pretty(&value).expect("JSON value serializes"))
        }
        None => {
            let [mixed, sources, lengths, metadata] = reader.shapes();
            let info = json!({
                "path": path.display().to_string(),
                "backend": reader.backend().name(),
                "num_samples": reader.len(),
                "first_index": reader.first_index(),
                "sample_len": reader.sample_len(),
                "shapes": {
                    "mixed_signals": mixed,
                    "source_signals": sources,
                    "signal_lengths": lengths,
                    "metadata": metadata,
                },
            });
            Ok(serde_json::to_string_pretty(&info).expect("JSON value serializes"))
        }
    }
}
