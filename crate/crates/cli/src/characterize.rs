use std::path::{Path, PathBuf};

use rfss_core::metrics::{aggregate, characterize, Characterization};
use rfss_core::waveforms::StandardId;
use rfss_core::IqBuffer;
use rfss_io::CorpusReader;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Mixture of one corpus row.
    Index(usize),
    /// Clean sources of one standard, averaged over the companion corpus.
    Standard(StandardId),
}

impl Selection {
    pub fn label(self) -> String {
        match self {
            Selection::Index(i) => format!("index{i}"),
            Selection::Standard(s) => s.name().to_string(),
        }
    }
}

fn trimmed(reader: &CorpusReader, row: usize, x: IqBuffer) -> Result<IqBuffer, CliError> {
    let len = reader.read_signal_length(row)? as usize;
    Ok(x.with_samples(x.samples[..len.min(x.len())].to_vec()))
}

/// Characterizes the selection. `corpus` is the mixture corpus for
/// [`Selection::Index`] and the companion for [`Selection::Standard`].
pub fn characterize_selection(corpus: &Path, sel: Selection) -> Result<Characterization, CliError> {
    let reader = CorpusReader::open(corpus)?;
    match sel {
        Selection::Index(row) => {
            let x = reader.read_mixture(row)?;
            Ok(characterize(&trimmed(&reader, row, x)?)?)
        }
        Selection::Standard(st) => {
            let mut items = Vec::new();
            for row in 0..reader.len() {
                let meta = reader.read_metadata(row)?;
                if meta.num_sources == 1 && meta.standards[0] == st {
                    let src = reader.read_sources(row)?.swap_remove(0);
                    items.push(characterize(&trimmed(&reader, row, src)?)?);
                }
            }
            aggregate(&items).ok_or_else(|| {
                CliError::Config(format!(
                    "no single-source {st} samples in {}",
                    corpus.display()
                ))
            })
        }
    }
}

/// Writes `<label>_{summary,psd,envelope,spectrogram}.csv` into `out_dir`.
pub fn write_csvs(
    c: &Characterization,
    out_dir: &Path,
    label: &str,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Output(format!("{}: {e}", out_dir.display())))?;
    let files = [
        ("summary", c.summary_csv()),
        ("psd", c.psd_csv()),
        ("envelope", c.envelope_csv()),
        ("spectrogram", c.spectrogram_csv()),
    ];
    files
        .into_iter()
        .map(|(kind, text)| {
            let p = out_dir.join(format!("{label}_{kind}.csv"));
            std::fs::write(&p, text)
                .map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
            Ok(p)
        })
        .collect()
}
