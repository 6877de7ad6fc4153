use std::path::Path;

use rayon::prelude::*;
use rfss_baselines::evaluate::{scoring_window, select_rows, windowed};
use rfss_baselines::{evaluate_baseline, EvalOptions, Method};
use rfss_core::metrics::{pit_si_sinr, stratified_report, EvalRecord, Report};
use rfss_io::CorpusReader;

use crate::CliError;

pub const EXTERNAL_METHOD: &str = "external";

#[derive(Debug, Clone, PartialEq)]
pub enum EvalMethod {
    Baseline(Method),
    /// Estimates stored in a corpus container aligned row by row with the
    /// evaluated corpus; slot k holds the estimate of source k.
    External(std::path::PathBuf),
}

/// First sample index at which the estimates stop lining up with the corpus.
fn misaligned(
    corpus: &CorpusReader,
    est: &CorpusReader,
    rows: &[usize],
) -> Result<Option<(u64, String)>, CliError> {
    let first = corpus.first_index();
    if est.first_index() != first {
        return Ok(Some((
            first,
            format!(
                "estimates start at sample {}, corpus at {first}",
                est.first_index()
            ),
        )));
    }
    if est.sample_len() != corpus.sample_len() {
        return Ok(Some((
            first,
            format!(
                "estimates hold {} samples per row, corpus {}",
                est.sample_len(),
                corpus.sample_len()
            ),
        )));
    }
    for &row in rows {
        let index = first + row as u64;
        if row >= est.len() {
            return Ok(Some((
                index,
                format!("estimates end after {} rows", est.len()),
            )));
        }
        if let Ok(meta) = est.read_metadata(row) {
            if meta.sample_index != index {
                return Ok(Some((
                    index,
                    format!("estimate row is labelled sample {}", meta.sample_index),
                )));
            }
        }
        if est.read_signal_length(row)? != corpus.read_signal_length(row)? {
            return Ok(Some((index, "signal lengths differ".to_string())));
        }
    }
    Ok(None)
}

pub fn evaluate_external(
    corpus: &CorpusReader,
    estimates: &Path,
    opts: &EvalOptions,
) -> Result<Vec<EvalRecord>, CliError> {
    let est = CorpusReader::open(estimates)?;
    let rows = select_rows(corpus, opts)?;
    if let Some((index, reason)) = misaligned(corpus, &est, &rows)? {
        return Err(CliError::Misaligned { index, reason });
    }
    rows.par_iter()
        .map(|&row| {
            let sample = corpus.read_sample(row)?;
            let meta = &sample.metadata;
            let w = scoring_window(meta.sample_index, sample.mixture.len(), opts.crop)?;
            let targets = sample
                .targets
                .iter()
                .map(|t| windowed(t, w))
                .collect::<Result<Vec<_>, _>>()?;
            let estimates = est.read_sources(row)?[..meta.num_sources]
                .iter()
                .map(|e| windowed(e, w))
                .collect::<Result<Vec<_>, _>>()?;
            let pit = pit_si_sinr(&estimates, &targets)?;
            Ok(EvalRecord::new(EXTERNAL_METHOD, pit, meta))
        })
        .collect()
}

pub fn evaluate(
    corpus: &Path,
    method: &EvalMethod,
    opts: &EvalOptions,
) -> Result<(Vec<EvalRecord>, Report), CliError> {
    let reader = CorpusReader::open(corpus)?;
    let records = match method {
        EvalMethod::Baseline(m) => {
            let opts = EvalOptions {
                method: *m,
                ..opts.clone()
            };
            evaluate_baseline(&reader, &opts)?
        }
        EvalMethod::External(path) => evaluate_external(&reader, path, opts)?,
    };
    if records.is_empty() {
        return Err(CliError::Config(
            "no test-split samples matched the selection".into(),
        ));
    }
    let report = stratified_report(&records)?;
    Ok((records, report))
}
