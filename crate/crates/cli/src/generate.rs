use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rfss_core::mixer::{MixingMode, MixtureSample};
use rfss_core::waveforms::StandardId;
use rfss_io::{content_digest, CorpusWriter, WriterOptions};

use crate::config::RunConfig;
use crate::CliError;

/// Sample index of the first companion row, far above any corpus index so
/// the two never share random streams.
pub const SINGLE_FIRST_INDEX: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tally {
    pub samples: usize,
    pub source_counts: BTreeMap<usize, usize>,
    pub modes: BTreeMap<&'static str, usize>,
    /// Source occurrences per standard.
    pub standards: BTreeMap<StandardId, usize>,
}

impl Tally {
    fn add(&mut self, s: &MixtureSample) {
        let m = &s.metadata;
        self.samples += 1;
        *self.source_counts.entry(m.num_sources).or_default() += 1;
        *self.modes.entry(m.mixing_mode.name()).or_default() += 1;
        for &st in &m.standards {
            *self.standards.entry(st).or_default() += 1;
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerateSummary {
    pub corpus: PathBuf,
    pub tally: Tally,
    pub digest: String,
    pub single: Option<(PathBuf, usize, String)>,
    pub wall_time: Duration,
}

/// Companion row `row` holds standard `row / per_standard`.
pub fn single_standard(row: usize, per_standard: usize) -> StandardId {
    StandardId::ALL[row / per_standard]
}

fn write_rows<F>(
    path: &Path,
    cfg: &RunConfig,
    first_index: u64,
    count: usize,
    cancel: &AtomicBool,
    pool: &rayon::ThreadPool,
    make: F,
) -> Result<Tally, CliError>
where
    F: Fn(u64) -> rfss_core::Result<MixtureSample> + Sync,
{
    let opts = WriterOptions {
        first_index,
        sample_len: cfg.sample_len,
    };
    let mut writer = CorpusWriter::create(path, cfg.backend, opts)?;
    let mut tally = Tally::default();
    let batch = cfg.workers * 4;
    let mut start = 0;
    while start < count {
        if cancel.load(Ordering::SeqCst) {
            writer.finish()?;
            return Err(CliError::Cancelled(tally.samples));
        }
        let end = (start + batch).min(count);
        let samples: Vec<_> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|r| make(first_index + r as u64))
                .collect::<rfss_core::Result<_>>()
        })?;
        for (r, s) in (start..end).zip(&samples) {
            writer.write_sample(first_index + r as u64, s)?;
            tally.add(s);
        }
        start = end;
    }
    writer.finish()?;
    Ok(tally)
}

/// Writes the mixture corpus and its single-source companion. Workers only
/// generate; rows reach the single writer in index order.
pub fn generate(cfg: &RunConfig, cancel: &AtomicBool) -> Result<GenerateSummary, CliError> {
    cfg.validate()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let generator = cfg.generator();
    let tally = write_rows(&cfg.out_path, cfg, 0, cfg.corpus_size, cancel, &pool, |i| {
        generator.generate(i)
    })?;
    let digest = content_digest(&cfg.out_path)?;
    let per = cfg.single_count();
    let single = if per > 0 {
        let path = cfg.companion_path();
        write_rows(
            &path,
            cfg,
            SINGLE_FIRST_INDEX,
            4 * per,
            cancel,
            &pool,
            |i| {
                generator
                    .generate_single(single_standard((i - SINGLE_FIRST_INDEX) as usize, per), i)
            },
        )?;
        let d = content_digest(&path)?;
        Some((path, 4 * per, d))
    } else {
        None
    };
    Ok(GenerateSummary {
        corpus: cfg.out_path.clone(),
        tally,
        digest,
        single,
        wall_time: started.elapsed(),
    })
}

impl fmt::Display for GenerateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.tally;
        let n = t.samples.max(1) as f64;
        writeln!(
            f,
            "corpus: {} ({} samples)",
            self.corpus.display(),
            t.samples
        )?;
        writeln!(f, "sources per sample:")?;
        for (k, c) in &t.source_counts {
            writeln!(f, "  {k}: {c} ({:.3})", *c as f64 / n)?;
        }
        writeln!(f, "mixing mode:")?;
        for mode in [MixingMode::CoChannel, MixingMode::AdjacentChannel] {
            let c = t.modes.get(mode.name()).copied().unwrap_or(0);
            writeln!(f, "  {}: {c} ({:.3})", mode.name(), c as f64 / n)?;
        }
        writeln!(f, "sources per standard:")?;
        for st in StandardId::ALL {
            writeln!(f, "  {st}: {}", t.standards.get(&st).copied().unwrap_or(0))?;
        }
        writeln!(f, "digest: {}", self.digest)?;
        if let Some((path, count, digest)) = &self.single {
            writeln!(
                f,
                "single-source companion: {} ({count} samples)",
                path.display()
            )?;
            writeln!(f, "single digest: {digest}")?;
        }
        write!(f, "wall time: {:.2} s", self.wall_time.as_secs_f64())
    }
}
