use std::path::{Path, PathBuf};

use rfss_core::mixer::{MixingMode, NoiseMode, PipelineConfig, SampleGenerator, TargetStage};
use rfss_core::SAMPLE_LEN;
use rfss_io::Backend;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "RFSS_WORKERS";

pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Declarative description of a generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub corpus_size: usize,
    pub out_path: PathBuf,
    pub backend: Backend,
    pub workers: usize,
    pub mode_filter: Option<MixingMode>,
    pub target_stage: TargetStage,
    pub noise_mode: NoiseMode,
    pub sample_len: usize,
    /// Companion samples per standard; defaults to one per hundred mixtures.
    pub single_per_standard: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 42,
            corpus_size: 100,
            out_path: PathBuf::from("rfss.h5"),
            backend: Backend::preferred(),
            workers: default_workers(),
            mode_filter: None,
            target_stage: TargetStage::Clean,
            noise_mode: NoiseMode::PerSource,
            sample_len: SAMPLE_LEN,
            single_per_standard: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.corpus_size < 1 {
            return bad("corpus_size must be at least 1");
        }
        if self.workers < 1 {
            return bad("workers must be at least 1");
        }
        if self.sample_len < 1 {
            return bad("sample_len must be at least 1");
        }
        if !self.backend.is_available() {
            return bad("the hdf5 backend is not compiled in");
        }
        Ok(())
    }

    pub fn generator(&self) -> SampleGenerator {
        SampleGenerator::new(
            self.master_seed,
            PipelineConfig {
                target_stage: self.target_stage,
                noise_mode: self.noise_mode,
                mode_filter: self.mode_filter,
                sample_len: Some(self.sample_len),
            },
        )
    }

    pub fn single_count(&self) -> usize {
        self.single_per_standard
            .unwrap_or(self.corpus_size.div_ceil(100))
    }

    pub fn companion_path(&self) -> PathBuf {
        companion_path(&self.out_path)
    }
}

/// `corpus.h5` pairs with `corpus_single.h5`, a directory `corpus` with
/// `corpus_single`.
pub fn companion_path(corpus: &Path) -> PathBuf {
    let stem = corpus
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match corpus.extension() {
        Some(ext) => format!("{stem}_single.{}", ext.to_string_lossy()),
        None => format!("{stem}_single"),
    };
    corpus.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_fills_defaults_and_rejects_unknown_keys() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"corpus_size": 7, "backend": "manifest", "mode_filter": "co_channel"}"#,
        )
        .unwrap();
        assert_eq!(cfg.master_seed, 42);
        assert_eq!(cfg.corpus_size, 7);
        assert_eq!(cfg.backend, Backend::Manifest);
        assert_eq!(cfg.mode_filter, Some(MixingMode::CoChannel));
        assert!(serde_json::from_str::<RunConfig>(r#"{"corpus_sise": 7}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"backend": "zarr"}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig {
            corpus_size: 0,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            workers: 0,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn companion_names() {
        assert_eq!(
            companion_path(Path::new("/d/rfss.h5")),
            PathBuf::from("/d/rfss_single.h5")
        );
        assert_eq!(
            companion_path(Path::new("out/corpus")),
            PathBuf::from("out/corpus_single")
        );
        let cfg = RunConfig {
            corpus_size: 100_000,
            ..RunConfig::default()
        };
        assert_eq!(cfg.single_count(), 1000);
        assert_eq!(
            RunConfig {
                corpus_size: 201,
                ..cfg
            }
            .single_count(),
            3
        );
    }
}
