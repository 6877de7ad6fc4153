//! HDF5 backend. Complex values use the compound type `{r: f32, i: f32}`;
//! every dataset is chunked one sample per chunk, deflated at level 6 and
//! grows along its first axis as rows arrive.

use std::path::Path;
use std::str::FromStr;

use hdf5::types::VarLenUnicode;
use hdf5::{Dataset, Extent, File, H5Type, SimpleExtents};
use ndarray::{s, Array1, Array2, Array3};
use num_complex::Complex64;

use crate::container::{BackendReader, BackendWriter, Row};
use crate::{IoError, Result, DEFLATE_LEVEL};

#[derive(H5Type, Clone, Copy, Debug, Default, PartialEq)]
#[repr(C)]
struct C32 {
    r: f32,
    i: f32,
}

impl From<Complex64> for C32 {
    fn from(c: Complex64) -> Self {
        Self {
            r: c.re as f32,
            i: c.im as f32,
        }
    }
}

impl From<C32> for Complex64 {
    fn from(c: C32) -> Self {
        Complex64::new(c.r as f64, c.i as f64)
    }
}

pub(crate) struct H5Writer {
    file: File,
    mixed: Dataset,
    sources: Dataset,
    lengths: Dataset,
    metadata: Dataset,
    rows: usize,
    sample_len: usize,
}

fn growable(tail: &[usize]) -> SimpleExtents {
    let mut dims = vec![Extent::resizable(0)];
    dims.extend(tail.iter().map(|&d| Extent::from(d)));
    SimpleExtents::from_vec(dims)
}

fn chunk(tail: &[usize]) -> Vec<usize> {
    let mut c = vec![1];
    c.extend_from_slice(tail);
    c
}

impl H5Writer {
    pub(crate) fn create(path: &Path, first_index: u64, sample_len: usize) -> Result<Self> {
        let file = File::with_options()
            .with_fcpl(|p| p.obj_track_times(false))
            .create(path)?;
        let m = rfss_core::MAX_SOURCES;
        let mk = |name: &str, tail: &[usize], td: hdf5::types::TypeDescriptor| -> Result<Dataset> {
            Ok(file
                .new_dataset_builder()
                .empty_as(&td)
                .shape(growable(tail))
                .chunk(chunk(tail))
                .deflate(DEFLATE_LEVEL as u8)
                .obj_track_times(false)
                .create(name)?)
        };
        let mixed = mk("mixed_signals", &[sample_len], C32::type_descriptor())?;
        let sources = mk("source_signals", &[m, sample_len], C32::type_descriptor())?;
        let lengths = mk("signal_lengths", &[], i32::type_descriptor())?;
        let metadata = mk("metadata", &[], VarLenUnicode::type_descriptor())?;
        file.new_attr::<u64>().create("first_index")?.write_scalar(&first_index)?;
        file.new_attr::<u64>().create("sample_len")?.write_scalar(&(sample_len as u64))?;
        file.new_attr::<f64>()
            .create("sample_rate_hz")?
            .write_scalar(&rfss_core::CORPUS_RATE_HZ)?;
        let layout = VarLenUnicode::from_str("compound {r: float32, i: float32}").expect("ascii");
        file.new_attr::<VarLenUnicode>().create("complex_layout")?.write_scalar(&layout)?;
        Ok(Self {
            file,
            mixed,
            sources,
            lengths,
            metadata,
            rows: 0,
            sample_len,
        })
    }

    fn append_inner(&mut self, row: &Row) -> hdf5::Result<()> {
        let r = self.rows;
        let l = self.sample_len;
        let m = rfss_core::MAX_SOURCES;
        self.mixed.resize((r + 1, l))?;
        let mix = Array2::from_shape_vec((1, l), row.mixture.iter().map(|&c| C32::from(c)).collect())
            .expect("row shape");
        self.mixed.write_slice(&mix, s![r..r + 1, ..])?;

        self.sources.resize((r + 1, m, l))?;
        let mut src = Array3::<C32>::default((1, m, l));
        for (slot, s) in row.sources.iter().enumerate() {
            for (n, &c) in s.iter().enumerate() {
                src[[0, slot, n]] = C32::from(c);
            }
        }
        self.sources.write_slice(&src, s![r..r + 1, .., ..])?;

        self.lengths.resize(r + 1)?;
        self.lengths.write_slice(&Array1::from_elem(1, row.signal_length), s![r..r + 1])?;

        self.metadata.resize(r + 1)?;
        let meta = VarLenUnicode::from_str(row.metadata).map_err(|e| hdf5::Error::from(e.to_string()))?;
        self.metadata.write_slice(&Array1::from_elem(1, meta), s![r..r + 1])?;
        self.rows += 1;
        Ok(())
    }
}

impl BackendWriter for H5Writer {
    fn append(&mut self, row: &Row) -> Result<()> {
        self.append_inner(row).map_err(|e| IoError::Write {
            index: row.index,
            reason: e.to_string(),
        })
    }

    fn finish(&mut self, _rows: usize) -> Result<()> {
        self.file.flush()?;
        Ok(())
    }
}

pub(crate) struct H5Reader {
    mixed: Dataset,
    sources: Dataset,
    lengths: Dataset,
    metadata: Dataset,
    len: usize,
    sample_len: usize,
    first_index: u64,
    _file: File,
}

impl H5Reader {
    pub(crate) fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let mixed = file.dataset("mixed_signals")?;
        let sources = file.dataset("source_signals")?;
        let lengths = file.dataset("signal_lengths")?;
        let metadata = file.dataset("metadata")?;
        let shape = mixed.shape();
        if shape.len() != 2 {
            return Err(IoError::Corrupt(format!("mixed_signals has shape {shape:?}")));
        }
        let first_index = file.attr("first_index")?.read_scalar::<u64>()?;
        Ok(Self {
            len: shape[0],
            sample_len: shape[1],
            mixed,
            sources,
            lengths,
            metadata,
            first_index,
            _file: file,
        })
    }
}

impl BackendReader for H5Reader {
    fn len(&self) -> usize {
        self.len
    }

    fn sample_len(&self) -> usize {
        self.sample_len
    }

    fn first_index(&self) -> u64 {
        self.first_index
    }

    fn mixture(&self, row: usize) -> Result<Vec<Complex64>> {
        let a: Array1<C32> = self.mixed.read_slice_1d(s![row, ..])?;
        Ok(a.iter().map(|&c| c.into()).collect())
    }

    fn sources(&self, row: usize) -> Result<Vec<Vec<Complex64>>> {
        let a: Array2<C32> = self.sources.read_slice_2d(s![row, .., ..])?;
        Ok(a.outer_iter()
            .map(|r| r.iter().map(|&c| c.into()).collect())
            .collect())
    }

    fn signal_length(&self, row: usize) -> Result<i32> {
        let a: Array1<i32> = self.lengths.read_slice_1d(s![row..row + 1])?;
        Ok(a[0])
    }

    fn shapes(&self) -> [Vec<usize>; 4] {
        [
            self.mixed.shape(),
            self.sources.shape(),
            self.lengths.shape(),
            self.metadata.shape(),
        ]
    }

    fn metadata(&self, row: usize) -> Result<String> {
        let a: Array1<VarLenUnicode> = self.metadata.read_slice_1d(s![row..row + 1])?;
        Ok(a[0].as_str().to_string())
    }
}
