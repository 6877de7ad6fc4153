use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rfss_core::mixer::{MixtureSample, SampleMetadata};
use rfss_core::{IqBuffer, CORPUS_RATE_HZ, MAX_SOURCES, SAMPLE_LEN};

use crate::manifest::{ManifestReader, ManifestWriter};
use crate::{Backend, IoError, Result};

pub(crate) struct Row<'a> {
    pub index: u64,
    pub mixture: &'a [Complex64],
    pub sources: &'a [&'a [Complex64]],
    pub signal_length: i32,
    pub metadata: &'a str,
}

pub(crate) trait BackendWriter {
    fn append(&mut self, row: &Row) -> Result<()>;
    fn finish(&mut self, rows: usize) -> Result<()>;
}

pub(crate) trait BackendReader: Send + Sync {
    fn len(&self) -> usize;
    fn sample_len(&self) -> usize;
    fn first_index(&self) -> u64;
    fn mixture(&self, row: usize) -> Result<Vec<Complex64>>;
    fn sources(&self, row: usize) -> Result<Vec<Vec<Complex64>>>;
    fn signal_length(&self, row: usize) -> Result<i32>;
    fn metadata(&self, row: usize) -> Result<String>;
    fn shapes(&self) -> [Vec<usize>; 4];
}

/// Interleaved little-endian float32 pairs.
pub(crate) fn encode_c32(x: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(x.len() * 8);
    for c in x {
        out.extend_from_slice(&(c.re as f32).to_le_bytes());
        out.extend_from_slice(&(c.im as f32).to_le_bytes());
    }
    out
}

pub(crate) fn decode_c32(raw: &[u8]) -> Vec<Complex64> {
    raw.chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[..4].try_into().unwrap());
            let im = f32::from_le_bytes(c[4..].try_into().unwrap());
            Complex64::new(re as f64, im as f64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriterOptions {
    /// Sample index stored in row 0.
    pub first_index: u64,
    pub sample_len: usize,
}

impl Default for WriterOptions {
    fn default() -> Self {
        Self {
            first_index: 0,
            sample_len: SAMPLE_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSummary {
    pub path: PathBuf,
    pub backend: Backend,
    pub num_samples: usize,
    pub first_index: u64,
}

/// Single-owner corpus writer. Rows must arrive in index order starting at
/// `first_index`. Dropping an unfinished writer finalizes the rows written
/// so far.
pub struct CorpusWriter {
    inner: Option<Box<dyn BackendWriter>>,
    path: PathBuf,
    backend: Backend,
    opts: WriterOptions,
    rows: usize,
}

impl CorpusWriter {
    pub fn create(path: &Path, backend: Backend, opts: WriterOptions) -> Result<Self> {
        if opts.sample_len == 0 {
            return Err(IoError::Corrupt("sample length must be positive".into()));
        }
        let inner: Box<dyn BackendWriter> = match backend {
            Backend::Manifest => Box::new(ManifestWriter::create(path, opts.first_index, opts.sample_len)?),
            #[cfg(feature = "hdf5")]
            Backend::Hdf5 => Box::new(crate::h5::H5Writer::create(path, opts.first_index, opts.sample_len)?),
            #[cfg(not(feature = "hdf5"))]
            Backend::Hdf5 => return Err(IoError::Hdf5Unavailable),
        };
        Ok(Self {
            inner: Some(inner),
            path: path.to_path_buf(),
            backend,
            opts,
            rows: 0,
        })
    }

    pub fn rows_written(&self) -> usize {
        self.rows
    }

    pub fn next_index(&self) -> u64 {
        self.opts.first_index + self.rows as u64
    }

    pub fn write_sample(&mut self, index: u64, sample: &MixtureSample) -> Result<()> {
        let sources: Vec<&[Complex64]> = sample.targets.iter().map(|t| t.samples.as_slice()).collect();
        self.write_row(index, &sample.mixture.samples, &sources, &sample.metadata.to_json())
    }

    /// Writes one row from raw parts; unused source slots are zero-filled.
    pub fn write_row(&mut self, index: u64, mixture: &[Complex64], sources: &[&[Complex64]], metadata_json: &str) -> Result<()> {
        let expected = self.next_index();
        if index != expected {
            return Err(IoError::NonContiguous { expected, got: index });
        }
        let l = self.opts.sample_len;
        let bad = |reason: String| IoError::Write { index, reason };
        if mixture.len() != l {
            return Err(bad(format!("mixture has {} samples, corpus rows hold {l}", mixture.len())));
        }
        if sources.len() > MAX_SOURCES {
            return Err(bad(format!("{} sources exceed the {MAX_SOURCES} slots", sources.len())));
        }
        if let Some(s) = sources.iter().find(|s| s.len() != l) {
            return Err(bad(format!("source has {} samples, corpus rows hold {l}", s.len())));
        }
        let row = Row {
            index,
            mixture,
            sources,
            signal_length: l as i32,
            metadata: metadata_json,
        };
        self.inner.as_mut().expect("writer is open").append(&row)?;
        self.rows += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<CorpusSummary> {
        let mut inner = self.inner.take().expect("writer is open");
        inner.finish(self.rows)?;
        drop(inner);
        Ok(CorpusSummary {
            path: self.path.clone(),
            backend: self.backend,
            num_samples: self.rows,
            first_index: self.opts.first_index,
        })
    }
}

impl Drop for CorpusWriter {
    fn drop(&mut self) {
        if let Some(mut inner) = self.inner.take() {
            let _ = inner.finish(self.rows);
        }
    }
}

/// Random-access reader; rows are addressed `0..len()`.
pub struct CorpusReader {
    inner: Box<dyn BackendReader>,
    backend: Backend,
    path: PathBuf,
}

impl CorpusReader {
    pub fn open(path: &Path) -> Result<Self> {
        let backend = Backend::detect(path)?;
        let inner: Box<dyn BackendReader> = match backend {
            Backend::Manifest => Box::new(ManifestReader::open(path)?),
            #[cfg(feature = "hdf5")]
            Backend::Hdf5 => Box::new(crate::h5::H5Reader::open(path)?),
            #[cfg(not(feature = "hdf5"))]
            Backend::Hdf5 => return Err(IoError::Hdf5Unavailable),
        };
        Ok(Self {
            inner,
            backend,
            path: path.to_path_buf(),
        })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_len(&self) -> usize {
        self.inner.sample_len()
    }

    pub fn first_index(&self) -> u64 {
        self.inner.first_index()
    }

    /// Logical shapes of `mixed_signals`, `source_signals`,
    /// `signal_lengths` and `metadata`.
    pub fn shapes(&self) -> [Vec<usize>; 4] {
        self.inner.shapes()
    }

    fn check(&self, row: usize) -> Result<()> {
        if row >= self.len() {
            return Err(IoError::OutOfRange { row, len: self.len() });
        }
        Ok(())
    }

    fn buffer(samples: Vec<Complex64>) -> Result<IqBuffer> {
        Ok(IqBuffer::new(samples, CORPUS_RATE_HZ)?)
    }

    pub fn read_mixture(&self, row: usize) -> Result<IqBuffer> {
        self.check(row)?;
        Self::buffer(self.inner.mixture(row)?)
    }

    /// All four source slots, including zero padding.
    pub fn read_sources(&self, row: usize) -> Result<Vec<IqBuffer>> {
        self.check(row)?;
        self.inner.sources(row)?.into_iter().map(Self::buffer).collect()
    }

    pub fn read_signal_length(&self, row: usize) -> Result<i32> {
        self.check(row)?;
        self.inner.signal_length(row)
    }

    pub fn read_metadata_json(&self, row: usize) -> Result<String> {
        self.check(row)?;
        self.inner.metadata(row)
    }

    pub fn read_metadata(&self, row: usize) -> Result<SampleMetadata> {
        let json = self.read_metadata_json(row)?;
        SampleMetadata::from_json(&json).map_err(|e| IoError::Corrupt(format!("row {row}: {e}")))
    }

    pub fn read_sample(&self, row: usize) -> Result<MixtureSample> {
        let metadata = self.read_metadata(row)?;
        let k = metadata.num_sources;
        if k > MAX_SOURCES {
            return Err(IoError::Corrupt(format!("row {row} declares {k} sources")));
        }
        let mut targets = self.read_sources(row)?;
        targets.truncate(k);
        Ok(MixtureSample {
            mixture: self.read_mixture(row)?,
            targets,
            scenario: metadata.scenario(),
            metadata,
        })
    }
}

/// Copies every row of `src` into a new corpus at `dst`.
pub fn convert(src: &Path, dst: &Path, backend: Backend) -> Result<CorpusSummary> {
    let reader = CorpusReader::open(src)?;
    let mut writer = CorpusWriter::create(
        dst,
        backend,
        WriterOptions {
            first_index: reader.first_index(),
            sample_len: reader.sample_len(),
        },
    )?;
    for row in 0..reader.len() {
        let meta = reader.read_metadata_json(row)?;
        let k = SampleMetadata::from_json(&meta).map(|m| m.num_sources).unwrap_or(MAX_SOURCES);
        let sources = reader.inner.sources(row)?;
        let slots: Vec<&[Complex64]> = sources.iter().take(k).map(Vec::as_slice).collect();
        let mixture = reader.inner.mixture(row)?;
        writer.write_row(reader.first_index() + row as u64, &mixture, &slots, &meta)?;
    }
    writer.finish()
}
