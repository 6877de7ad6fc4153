//! Directory backend: `manifest.json` plus, per dataset, a `.bin` file of
//! concatenated zlib frames (one per sample) and a `.idx` file of
//! little-endian `(offset: u64, length: u64)` pairs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::container::{decode_c32, encode_c32, BackendReader, BackendWriter, Row};
use crate::{io_err, IoError, Result, DATASETS, DEFLATE_LEVEL};

pub const MANIFEST_FORMAT: &str = "rfss-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub shape: Vec<usize>,
    pub dtype: String,
    pub data: String,
    pub index: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub num_samples: usize,
    pub first_index: u64,
    pub sample_len: usize,
    pub max_sources: usize,
    pub sample_rate_hz: f64,
    pub complex_layout: String,
    pub compression: String,
    pub complete: bool,
    pub datasets: BTreeMap<String, DatasetEntry>,
}

impl Manifest {
    fn new(rows: usize, first_index: u64, sample_len: usize, complete: bool) -> Self {
        let l = sample_len;
        let m = rfss_core::MAX_SOURCES;
        let dtypes = [
            (vec![rows, l], "complex64"),
            (vec![rows, m, l], "complex64"),
            (vec![rows], "int32"),
            (vec![rows], "utf8-json"),
        ];
        let datasets = DATASETS
            .iter()
            .zip(dtypes)
            .map(|(name, (shape, dtype))| {
                (
                    name.to_string(),
                    DatasetEntry {
                        shape,
                        dtype: dtype.into(),
                        data: format!("{name}.bin"),
                        index: format!("{name}.idx"),
                    },
                )
            })
            .collect();
        Self {
            format: MANIFEST_FORMAT.into(),
            num_samples: rows,
            first_index,
            sample_len,
            max_sources: m,
            sample_rate_hz: rfss_core::CORPUS_RATE_HZ,
            complex_layout: "interleaved little-endian float32 (re, im)".into(),
            compression: format!("zlib level {DEFLATE_LEVEL}, one frame per sample"),
            complete,
            datasets,
        }
    }
}

struct Shard {
    data: BufWriter<File>,
    index: BufWriter<File>,
    offset: u64,
}

pub(crate) struct ManifestWriter {
    dir: PathBuf,
    shards: Vec<Shard>,
    first_index: u64,
    sample_len: usize,
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(m).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))
}

impl ManifestWriter {
    pub(crate) fn create(dir: &Path, first_index: u64, sample_len: usize) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut shards = Vec::new();
        for name in DATASETS {
            let open = |ext: &str| -> Result<BufWriter<File>> {
                let p = dir.join(format!("{name}.{ext}"));
                Ok(BufWriter::new(File::create(&p).map_err(io_err(&p))?))
            };
            shards.push(Shard {
                data: open("bin")?,
                index: open("idx")?,
                offset: 0,
            });
        }
        write_manifest(dir, &Manifest::new(0, first_index, sample_len, false))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            shards,
            first_index,
            sample_len,
        })
    }

    fn append_frame(&mut self, dataset: usize, raw: &[u8]) -> std::io::Result<()> {
        let mut enc = ZlibEncoder::new(Vec::new(), Compression::new(DEFLATE_LEVEL));
        enc.write_all(raw)?;
        let frame = enc.finish()?;
        let shard = &mut self.shards[dataset];
        shard.data.write_all(&frame)?;
        shard.index.write_all(&shard.offset.to_le_bytes())?;
        shard.index.write_all(&(frame.len() as u64).to_le_bytes())?;
        shard.offset += frame.len() as u64;
        Ok(())
    }
}

impl BackendWriter for ManifestWriter {
    fn append(&mut self, row: &Row) -> Result<()> {
        let map = |e: std::io::Error| IoError::Write {
            index: row.index,
            reason: e.to_string(),
        };
        self.append_frame(0, &encode_c32(row.mixture)).map_err(map)?;
        let mut sources = Vec::with_capacity(rfss_core::MAX_SOURCES * self.sample_len * 8);
        for slot in 0..rfss_core::MAX_SOURCES {
            match row.sources.get(slot) {
                Some(s) => sources.extend(encode_c32(s)),
                None => sources.resize(sources.len() + self.sample_len * 8, 0),
            }
        }
        self.append_frame(1, &sources).map_err(map)?;
        self.append_frame(2, &row.signal_length.to_le_bytes()).map_err(map)?;
        self.append_frame(3, row.metadata.as_bytes()).map_err(map)?;
        Ok(())
    }

    fn finish(&mut self, rows: usize) -> Result<()> {
        for s in &mut self.shards {
            s.data.flush().map_err(io_err(&self.dir))?;
            s.index.flush().map_err(io_err(&self.dir))?;
        }
        write_manifest(&self.dir, &Manifest::new(rows, self.first_index, self.sample_len, true))
    }
}

pub(crate) struct ManifestReader {
    manifest: Manifest,
    data: Vec<File>,
    index: Vec<Vec<(u64, u64)>>,
}

impl ManifestReader {
    pub(crate) fn open(dir: &Path) -> Result<Self> {
        let mpath = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| IoError::Corrupt(format!("{}: {e}", mpath.display())))?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(IoError::Corrupt(format!("unsupported format {:?}", manifest.format)));
        }
        let mut data = Vec::new();
        let mut index = Vec::new();
        for name in DATASETS {
            let entry = manifest
                .datasets
                .get(name)
                .ok_or_else(|| IoError::Corrupt(format!("manifest lacks dataset {name}")))?;
            let dp = dir.join(&entry.data);
            data.push(File::open(&dp).map_err(io_err(&dp))?);
            let ip = dir.join(&entry.index);
            let raw = std::fs::read(&ip).map_err(io_err(&ip))?;
            let pairs: Vec<(u64, u64)> = raw
                .chunks_exact(16)
                .map(|c| {
                    (
                        u64::from_le_bytes(c[..8].try_into().unwrap()),
                        u64::from_le_bytes(c[8..].try_into().unwrap()),
                    )
                })
                .collect();
            if pairs.len() < manifest.num_samples {
                return Err(IoError::Corrupt(format!(
                    "{name} index has {} rows, manifest declares {}",
                    pairs.len(),
                    manifest.num_samples
                )));
            }
            index.push(pairs);
        }
        Ok(Self { manifest, data, index })
    }

    fn frame(&self, dataset: usize, row: usize) -> Result<Vec<u8>> {
        let (offset, len) = self.index[dataset][row];
        let mut buf = vec![0u8; len as usize];
        self.data[dataset]
            .read_exact_at(&mut buf, offset)
            .map_err(|e| IoError::Corrupt(format!("{} row {row}: {e}", DATASETS[dataset])))?;
        let mut out = Vec::new();
        ZlibDecoder::new(&buf[..])
            .read_to_end(&mut out)
            .map_err(|e| IoError::Corrupt(format!("{} row {row}: {e}", DATASETS[dataset])))?;
        Ok(out)
    }

    fn complex_frame(&self, dataset: usize, row: usize, expected: usize) -> Result<Vec<Complex64>> {
        let raw = self.frame(dataset, row)?;
        if raw.len() != expected * 8 {
            return Err(IoError::Corrupt(format!(
                "{} row {row} holds {} bytes, expected {}",
                DATASETS[dataset],
                raw.len(),
                expected * 8
            )));
        }
        Ok(decode_c32(&raw))
    }
}

impl BackendReader for ManifestReader {
    fn len(&self) -> usize {
        self.manifest.num_samples
    }

    fn sample_len(&self) -> usize {
        self.manifest.sample_len
    }

    fn first_index(&self) -> u64 {
        self.manifest.first_index
    }

    fn mixture(&self, row: usize) -> Result<Vec<Complex64>> {
        self.complex_frame(0, row, self.manifest.sample_len)
    }

    fn sources(&self, row: usize) -> Result<Vec<Vec<Complex64>>> {
        let l = self.manifest.sample_len;
        let all = self.complex_frame(1, row, rfss_core::MAX_SOURCES * l)?;
        Ok(all.chunks(l).map(<[Complex64]>::to_vec).collect())
    }

    fn signal_length(&self, row: usize) -> Result<i32> {
        let raw = self.frame(2, row)?;
        let bytes: [u8; 4] = raw
            .as_slice()
            .try_into()
            .map_err(|_| IoError::Corrupt(format!("signal_lengths row {row} is not 4 bytes")))?;
        Ok(i32::from_le_bytes(bytes))
    }

    fn shapes(&self) -> [Vec<usize>; 4] {
        DATASETS.map(|name| {
            self.manifest
                .datasets
                .get(name)
                .map(|d| d.shape.clone())
                .unwrap_or_default()
        })
    }

    fn metadata(&self, row: usize) -> Result<String> {
        String::from_utf8(self.frame(3, row)?)
            .map_err(|e| IoError::Corrupt(format!("metadata row {row}: {e}")))
    }
}
