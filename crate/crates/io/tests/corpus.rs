use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rfss_core::mixer::{MixtureSample, PipelineConfig, SampleGenerator};
use rfss_core::{MAX_SOURCES, SAMPLE_LEN};
use rfss_io::{
    content_digest, convert, split_indices, Backend, CorpusReader, CorpusWriter, IoError, SplitSpec, WriterOptions,
};

const N: usize = 10;

fn samples() -> &'static [MixtureSample] {
    static CELL: OnceLock<Vec<MixtureSample>> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = SampleGenerator::new(42, PipelineConfig::default());
        (0..N as u64).map(|i| g.generate(i).unwrap()).collect()
    })
}

fn write(path: &Path, backend: Backend) {
    let mut w = CorpusWriter::create(path, backend, WriterOptions::default()).unwrap();
    for (i, s) in samples().iter().enumerate() {
        w.write_sample(i as u64, s).unwrap();
    }
    let summary = w.finish().unwrap();
    assert_eq!(summary.num_samples, N);
}

fn quantized(x: &[Complex64]) -> Vec<Complex64> {
    x.iter()
        .map(|c| Complex64::new(c.re as f32 as f64, c.im as f32 as f64))
        .collect()
}

fn backends() -> Vec<Backend> {
    [Backend::Manifest, Backend::Hdf5].into_iter().filter(|b| b.is_available()).collect()
}

fn corpus_path(dir: &Path, backend: Backend) -> std::path::PathBuf {
    match backend {
        Backend::Hdf5 => dir.join("corpus.h5"),
        Backend::Manifest => dir.join("corpus"),
    }
}

#[test]
fn layout_and_round_trip() {
    for backend in backends() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_path(dir.path(), backend);
        write(&path, backend);
        let r = CorpusReader::open(&path).unwrap();
        assert_eq!(r.backend(), backend);
        assert_eq!(r.len(), N);
        assert_eq!(
            r.shapes(),
            [vec![N, SAMPLE_LEN], vec![N, MAX_SOURCES, SAMPLE_LEN], vec![N], vec![N]]
        );

        let orig = &samples()[7];
        let got = r.read_sample(7).unwrap();
        assert_eq!(got.mixture.samples, quantized(&orig.mixture.samples));
        for (a, b) in got.targets.iter().zip(&orig.targets) {
            assert_eq!(a.samples, quantized(&b.samples));
        }
        assert_eq!(got.metadata, orig.metadata);
        assert_eq!(got.scenario, orig.scenario);

        for row in 0..N {
            let meta = r.read_metadata(row).unwrap();
            let slots = r.read_sources(row).unwrap();
            let nonzero = slots.iter().filter(|s| s.samples.iter().any(|c| c.norm() > 0.0)).count();
            assert_eq!(nonzero, meta.num_sources);
            for s in &slots[meta.num_sources..] {
                assert!(s.samples.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
            }
            assert_eq!(r.read_signal_length(row).unwrap(), SAMPLE_LEN as i32);
        }

        let first = r.read_sample(7).unwrap();
        r.read_sample(3).unwrap();
        assert_eq!(r.read_sample(7).unwrap(), first);
        assert!(matches!(r.read_sample(N), Err(IoError::OutOfRange { .. })));
    }
}

#[test]
fn two_writes_are_byte_identical() {
    for backend in backends() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let pa = corpus_path(a.path(), backend);
        let pb = corpus_path(b.path(), backend);
        write(&pa, backend);
        write(&pb, backend);
        assert_eq!(content_digest(&pa).unwrap(), content_digest(&pb).unwrap(), "{backend}");
    }
}

#[test]
fn backends_hold_the_same_logical_corpus() {
    if !Backend::Hdf5.is_available() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m");
    write(&manifest, Backend::Manifest);
    let h5 = dir.path().join("c.h5");
    convert(&manifest, &h5, Backend::Hdf5).unwrap();
    let back = dir.path().join("m2");
    convert(&h5, &back, Backend::Manifest).unwrap();

    let (rm, rh) = (CorpusReader::open(&manifest).unwrap(), CorpusReader::open(&h5).unwrap());
    assert_eq!(rm.shapes(), rh.shapes());
    for row in 0..N {
        assert_eq!(rm.read_mixture(row).unwrap(), rh.read_mixture(row).unwrap());
        assert_eq!(rm.read_sources(row).unwrap(), rh.read_sources(row).unwrap());
        assert_eq!(rm.read_metadata_json(row).unwrap(), rh.read_metadata_json(row).unwrap());
        assert_eq!(rm.read_signal_length(row).unwrap(), rh.read_signal_length(row).unwrap());
    }
    assert_eq!(content_digest(&manifest).unwrap(), content_digest(&back).unwrap());
}

#[test]
fn writer_rejects_gaps_and_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c");
    let opts = WriterOptions {
        first_index: 100,
        sample_len: 8,
    };
    let mut w = CorpusWriter::create(&path, Backend::Manifest, opts).unwrap();
    let x = vec![Complex64::new(1.0, 0.0); 8];
    assert!(matches!(
        w.write_row(0, &x, &[&x], "{}"),
        Err(IoError::NonContiguous { expected: 100, got: 0 })
    ));
    w.write_row(100, &x, &[&x], "{}").unwrap();
    assert!(matches!(w.write_row(101, &x[..4], &[], "{}"), Err(IoError::Write { index: 101, .. })));
    let five = [x.as_slice(); 5];
    assert!(w.write_row(101, &x, &five, "{}").is_err());
    assert!(matches!(w.write_row(102, &x, &[], "{}"), Err(IoError::NonContiguous { .. })));
    assert_eq!(w.finish().unwrap().num_samples, 1);
}

#[test]
fn dropped_writer_leaves_a_valid_truncated_corpus() {
    for backend in backends() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_path(dir.path(), backend);
        {
            let mut w = CorpusWriter::create(&path, backend, WriterOptions::default()).unwrap();
            for (i, s) in samples().iter().take(3).enumerate() {
                w.write_sample(i as u64, s).unwrap();
            }
        }
        let r = CorpusReader::open(&path).unwrap();
        assert_eq!(r.len(), 3);
        r.read_sample(2).unwrap();
    }
}

#[test]
fn missing_corpus_is_an_io_error() {
    assert!(matches!(
        CorpusReader::open(Path::new("/nonexistent/corpus")),
        Err(IoError::Io { .. })
    ));
}

#[test]
fn splits() {
    let s = split_indices(SplitSpec::default(), 100_000);
    assert_eq!((s.train.len(), s.val[0], s.test[0]), (70_000, 70_000, 85_000));
    assert_eq!(*s.test.last().unwrap(), 99_999);
    let s = split_indices(SplitSpec::default(), 100);
    assert_eq!((s.train.len(), s.val.len(), s.test.len()), (70, 15, 15));
    let s = split_indices(SplitSpec::default(), 1);
    assert_eq!((s.train, s.val, s.test), (vec![0], vec![], vec![]));
    for n in 1..500 {
        let s = split_indices(SplitSpec::default(), n);
        let all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn backend_names() {
    assert_eq!("manifest".parse::<Backend>().unwrap(), Backend::Manifest);
    assert_eq!("HDF5".parse::<Backend>().unwrap(), Backend::Hdf5);
    assert!("zarr".parse::<Backend>().is_err());
}
