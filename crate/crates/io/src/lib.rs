//! Corpus containers.
//!
//! A corpus holds four row-aligned datasets:
//!
//! | name             | shape              | element                  |
//! |------------------|--------------------|--------------------------|
//! | `mixed_signals`  | `(N, L)`           | complex float32          |
//! | `source_signals` | `(N, 4, L)`        | complex float32, zero-padded |
//! | `signal_lengths` | `(N,)`             | int32                    |
//! | `metadata`       | `(N,)`             | JSON string              |
//!
//! Rows are compressed one sample at a time with deflate level 6. Two
//! backends share this schema: an HDF5 file (feature `hdf5`) and a
//! directory of binary shards described by `manifest.json`.

mod container;
#[cfg(feature = "hdf5")]
mod h5;
mod manifest;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use container::{convert, CorpusReader, CorpusSummary, CorpusWriter, WriterOptions};
pub use manifest::{Manifest, MANIFEST_FILE, MANIFEST_FORMAT};
pub use rfss_core::mixer::{MixtureSample, SampleMetadata};

pub const DATASETS: [&str; 4] = ["mixed_signals", "source_signals", "signal_lengths", "metadata"];
pub const DEFLATE_LEVEL: u32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("write of sample {index} failed: {reason}")]
    Write { index: u64, reason: String },
    #[error("expected sample index {expected}, got {got}")]
    NonContiguous { expected: u64, got: u64 },
    #[error("row {row} out of range for a corpus of {len} rows")]
    OutOfRange { row: usize, len: usize },
    #[error("corrupt corpus: {0}")]
    Corrupt(String),
    #[error("HDF5 support is not compiled in")]
    Hdf5Unavailable,
    #[cfg(feature = "hdf5")]
    #[error("HDF5 error: {0}")]
    Hdf5(#[from] hdf5::Error),
    #[error(transparent)]
    Core(#[from] rfss_core::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Hdf5,
    Manifest,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Hdf5 => "hdf5",
            Backend::Manifest => "manifest",
        }
    }

    pub fn is_available(self) -> bool {
        match self {
            Backend::Hdf5 => cfg!(feature = "hdf5"),
            Backend::Manifest => true,
        }
    }

    /// HDF5 when compiled in, otherwise the manifest directory.
    pub fn preferred() -> Self {
        if Backend::Hdf5.is_available() {
            Backend::Hdf5
        } else {
            Backend::Manifest
        }
    }

    /// Backend of an existing corpus at `path`.
    pub fn detect(path: &Path) -> Result<Self> {
        if path.join(MANIFEST_FILE).is_file() {
            Ok(Backend::Manifest)
        } else if path.is_file() {
            Ok(Backend::Hdf5)
        } else {
            Err(IoError::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no corpus found"),
            })
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hdf5" | "h5" => Ok(Backend::Hdf5),
            "manifest" => Ok(Backend::Manifest),
            other => Err(format!("unknown backend {other:?} (expected hdf5 or manifest)")),
        }
    }
}

/// Train/validation/test proportions in percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_pct: usize,
    pub val_pct: usize,
    pub test_pct: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_pct: 70,
            val_pct: 15,
            test_pct: 15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Contiguous index ranges. Validation and test sizes are floored and the
/// remainder goes to training, so a one-sample corpus is all training.
pub fn split_indices(spec: SplitSpec, corpus_size: usize) -> Splits {
    let total = spec.train_pct + spec.val_pct + spec.test_pct;
    let val = corpus_size * spec.val_pct / total;
    let test = corpus_size * spec.test_pct / total;
    let train = corpus_size - val - test;
    Splits {
        train: (0..train).collect(),
        val: (train..train + val).collect(),
        test: (train + val..corpus_size).collect(),
    }
}

/// SHA-256 over the corpus bytes. For a manifest directory every file is
/// hashed in name order together with its name.
pub fn content_digest(path: &Path) -> Result<String> {
    let mut h = Sha256::new();
    if path.is_dir() {
        let mut names: Vec<_> = std::fs::read_dir(path)
            .map_err(io_err(path))?
            .map(|e| e.map(|e| e.file_name()))
            .collect::<std::io::Result<_>>()
            .map_err(io_err(path))?;
        names.sort();
        for name in names {
            let p = path.join(&name);
            h.update(name.to_string_lossy().as_bytes());
            h.update(std::fs::read(&p).map_err(io_err(&p))?);
        }
    } else {
        h.update(std::fs::read(path).map_err(io_err(path))?);
    }
    Ok(hex::encode(h.finalize()))
}
