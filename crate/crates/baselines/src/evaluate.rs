use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use rfss_core::metrics::{crop, eval_crop_offset, pit_si_sinr, EvalRecord};
use rfss_core::mixer::{MixingMode, MixtureSample, SampleGenerator, ScenarioDraw};
use rfss_core::{IqBuffer, SeedContext, StreamTag};
use rfss_io::{split_indices, CorpusReader, SplitSpec};
use serde::{Deserialize, Serialize};

use crate::{fastica_separate, nmf_separate, BaselineError, Result};

/// Lane of the separator initialization streams.
const SEPARATOR_LANE: u64 = 0x0ba5_e11e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ica,
    Nmf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ica => "ica",
            Method::Nmf => "nmf",
        }
    }

    pub fn separate(
        self,
        x: &IqBuffer,
        num_sources: usize,
        ctx: SeedContext,
    ) -> Result<Vec<IqBuffer>> {
        Ok(match self {
            Method::Ica => fastica_separate(x, num_sources, ctx)?.estimates,
            Method::Nmf => nmf_separate(x, num_sources, ctx)?.estimates,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ica" | "fastica" => Ok(Method::Ica),
            "nmf" => Ok(Method::Nmf),
            other => Err(format!("unknown method {other:?} (expected ica or nmf)")),
        }
    }
}

/// Row-addressed supply of corpus samples.
pub trait SampleSource: Sync {
    fn len(&self) -> usize;
    fn scenario(&self, row: usize) -> Result<ScenarioDraw>;
    fn sample(&self, row: usize) -> Result<MixtureSample>;
}

impl SampleSource for CorpusReader {
    fn len(&self) -> usize {
        CorpusReader::len(self)
    }

    fn scenario(&self, row: usize) -> Result<ScenarioDraw> {
        Ok(self.read_metadata(row)?.scenario())
    }

    fn sample(&self, row: usize) -> Result<MixtureSample> {
        Ok(self.read_sample(row)?)
    }
}

/// A corpus generated on demand instead of read from disk.
#[derive(Debug, Clone, Copy)]
pub struct GeneratedCorpus {
    pub generator: SampleGenerator,
    pub size: usize,
}

impl SampleSource for GeneratedCorpus {
    fn len(&self) -> usize {
        self.size
    }

    fn scenario(&self, row: usize) -> Result<ScenarioDraw> {
        Ok(self.generator.scenario(row as u64))
    }

    fn sample(&self, row: usize) -> Result<MixtureSample> {
        Ok(self.generator.generate(row as u64)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub method: Method,
    /// Samples scored per source count.
    pub n_per_count: usize,
    pub source_counts: Vec<usize>,
    pub mode: Option<MixingMode>,
    /// Score a random `(length, seed)` crop instead of the full signal.
    pub crop: Option<(usize, u64)>,
    pub seed: u64,
}

impl EvalOptions {
    pub fn new(method: Method, n_per_count: usize) -> Self {
        Self {
            method,
            n_per_count,
            source_counts: vec![2, 3, 4],
            mode: None,
            crop: None,
            seed: 42,
        }
    }
}

/// Test-split rows chosen for evaluation: the first `n_per_count` of each
/// requested source count (optionally of one mode), in row order.
pub fn select_rows<S: SampleSource + ?Sized>(src: &S, opts: &EvalOptions) -> Result<Vec<usize>> {
    let mut taken = vec![0usize; rfss_core::MAX_SOURCES + 1];
    let mut rows = Vec::new();
    if opts.n_per_count == 0 {
        return Ok(rows);
    }
    let wanted = opts.source_counts.len() * opts.n_per_count;
    for row in split_indices(SplitSpec::default(), src.len()).test {
        let s = src.scenario(row)?;
        if !opts.source_counts.contains(&s.num_sources) || opts.mode.is_some_and(|m| m != s.mode) {
            continue;
        }
        if taken[s.num_sources] < opts.n_per_count {
            taken[s.num_sources] += 1;
            rows.push(row);
            if rows.len() == wanted {
                break;
            }
        }
    }
    Ok(rows)
}

/// `(offset, length)` of the scored span: the whole signal, or the seeded
/// crop when one is configured.
pub fn scoring_window(sample_index: u64, total: usize, crop: Option<(usize, u64)>) -> Result<(usize, usize)> {
    Ok(match crop {
        Some((len, seed)) => (eval_crop_offset(sample_index, total, len, seed)?, len),
        None => (0, total),
    })
}

pub fn windowed(x: &IqBuffer, (offset, len): (usize, usize)) -> Result<IqBuffer> {
    Ok(crop(x, offset, len)?)
}

pub fn score_sample(sample: &MixtureSample, opts: &EvalOptions) -> Result<EvalRecord> {
    let meta = &sample.metadata;
    let k = meta.num_sources;
    let w = scoring_window(meta.sample_index, sample.mixture.len(), opts.crop)?;
    let mixture = windowed(&sample.mixture, w)?;
    let targets = sample.targets.iter().map(|t| windowed(t, w)).collect::<Result<Vec<_>>>()?;
    let ctx = SeedContext::new(opts.seed, meta.sample_index, StreamTag::Scenario)
        .with_lane(SEPARATOR_LANE);
    let estimates = opts.method.separate(&mixture, k, ctx)?;
    if estimates.len() != k {
        return Err(BaselineError::Parameter(format!(
            "{} returned {} estimates for {k} sources",
            opts.method,
            estimates.len()
        )));
    }
    let pit = pit_si_sinr(&estimates, &targets)?;
    Ok(EvalRecord::new(opts.method.name(), pit, meta))
}

/// Separates and scores the selected test rows in parallel. Records come
/// back in row order regardless of scheduling.
pub fn evaluate_baseline<S: SampleSource + ?Sized>(
    src: &S,
    opts: &EvalOptions,
) -> Result<Vec<EvalRecord>> {
    let rows = select_rows(src, opts)?;
    rows.par_iter()
        .map(|&row| score_sample(&src.sample(row)?, opts))
        .collect()
}

pub fn evaluate_corpus(path: &Path, opts: &EvalOptions) -> Result<Vec<EvalRecord>> {
    let reader = CorpusReader::open(path)?;
    evaluate_baseline(&reader, opts)
}
