use std::f64::consts::PI;

use num_complex::Complex64;
use rfss_baselines::fastica::{fastica_whitened, symmetric_decorrelation};
use rfss_baselines::hankel::hankel_embed;
use rfss_baselines::nmf::{nmf, nmf_from, wiener_masks, NMF_ITERATIONS};
use rfss_baselines::stft::{stft, STFT_HOP, STFT_NFFT};
use rfss_baselines::{fastica_separate, nmf_separate};
use rfss_core::channel::complex_noise;
use rfss_core::dsp::spectral::welch;
use rfss_core::metrics::{pit_si_sinr, si_sinr};
use rfss_core::mixer::frequency_shift;
use rfss_core::waveforms::{generate, StandardId, WaveformConfig};
use rfss_core::{IqBuffer, SeedContext, StreamTag, CORPUS_RATE_HZ, SAMPLE_LEN};

fn ctx(i: u64) -> SeedContext {
    SeedContext::new(42, i, StreamTag::Scenario)
}

fn tone(f_hz: f64, phase: f64, n: usize) -> IqBuffer {
    let s = (0..n)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * f_hz * i as f64 / CORPUS_RATE_HZ + phase))
        .collect();
    IqBuffer::new(s, CORPUS_RATE_HZ).unwrap()
}

fn sum(a: &IqBuffer, b: &IqBuffer) -> IqBuffer {
    a.with_samples(
        a.samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| x + y)
            .collect(),
    )
}

fn rms_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    (a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        / a.len() as f64)
        .sqrt()
}

fn centroid(x: &IqBuffer) -> f64 {
    welch(&x.samples, CORPUS_RATE_HZ, 4096, 2048).centroid_hz()
}

#[test]
fn ica_two_tones() {
    // -3 MHz advances half a cycle per hop, so its frame coefficients are real up to a constant phase
    let n = SAMPLE_LEN;
    let a = tone(-3e6, 0.3, n);
    let b = tone(4.37e6, 1.1, n);
    let x = sum(&a, &b);
    let out = fastica_separate(&x, 2, ctx(0)).unwrap();
    assert!(out.converged);
    let pit = pit_si_sinr(&out.estimates, &[a, b]).unwrap();
    let mut centroids: Vec<f64> = out.estimates.iter().map(centroid).collect();
    centroids.sort_by(f64::total_cmp);
    assert!((centroids[0] + 3e6).abs() <= 100e3, "{centroids:?}");
    assert!((centroids[1] - 4.37e6).abs() <= 100e3, "{centroids:?}");
    assert!(pit.mean_db > 20.0, "{}", pit.mean_db);
}

#[test]
fn tones_sharing_frame_phase_advance_are_rank_two() {
    // 1 MHz and 7 MHz both advance 1/6 cycle per 128-sample hop
    let x = sum(&tone(1e6, 0.3, 32_768), &tone(7e6, 1.1, 32_768));
    let frames = hankel_embed(&x).unwrap();
    let sv = frames.rows.clone().singular_values();
    let top = sv.max();
    let significant = sv.iter().filter(|&&v| v > 1e-6 * top).count();
    assert_eq!(significant, 2, "{sv}");
}

#[test]
fn ica_single_source_and_determinism() {
    let x = generate(
        &WaveformConfig::new(StandardId::Lte),
        SeedContext::new(1, 0, StreamTag::Bits),
    )
    .unwrap();
    let one = fastica_separate(&x, 1, ctx(1)).unwrap();
    assert!(si_sinr(&one.estimates[0], &x).unwrap() > 20.0);
    let y = generate(
        &WaveformConfig::new(StandardId::Gsm),
        SeedContext::new(1, 0, StreamTag::Bits),
    )
    .unwrap();
    let mix = sum(&x, &y);
    let first = fastica_separate(&mix, 2, ctx(2)).unwrap();
    assert_eq!(first, fastica_separate(&mix, 2, ctx(2)).unwrap());
    assert!(fastica_separate(&mix, 5, ctx(2)).is_err());
    assert!(fastica_separate(&mix, 0, ctx(2)).is_err());
}

#[test]
fn ica_unmixing_rows_orthonormal() {
    let gens: Vec<IqBuffer> = [StandardId::Gsm, StandardId::Umts, StandardId::Nr]
        .iter()
        .map(|&s| {
            generate(
                &WaveformConfig::new(s),
                SeedContext::new(3, 0, StreamTag::Bits),
            )
            .unwrap()
        })
        .collect();
    let mix = sum(&sum(&gens[0], &gens[1]), &gens[2]);
    let out = fastica_separate(&mix, 3, ctx(3)).unwrap();
    let wwt = &out.unmixing * out.unmixing.transpose();
    let err = (wwt - nalgebra::DMatrix::<f64>::identity(3, 3)).abs().max();
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn fastica_recovers_laplacian_sources() {
    // whitened 2-D mixture of two super-Gaussian sources
    let mut rng = SeedContext::new(5, 0, StreamTag::Noise).stream();
    let n = 20_000;
    use rand_distr::{Distribution, Exp};
    let e = Exp::new(1.0).unwrap();
    let s: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let mut v = [0.0; 2];
            for c in &mut v {
                let m: f64 = e.sample(&mut rng);
                *c = if rand::Rng::gen::<bool>(&mut rng) {
                    m
                } else {
                    -m
                } / 2f64.sqrt();
            }
            v
        })
        .collect();
    let theta: f64 = 0.6;
    let z = nalgebra::DMatrix::from_fn(n, 2, |i, c| {
        let (a, b) = (s[i][0], s[i][1]);
        if c == 0 {
            theta.cos() * a - theta.sin() * b
        } else {
            theta.sin() * a + theta.cos() * b
        }
    });
    let w0 = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.2, -0.3, 1.0]);
    let (w, converged, _) = fastica_whitened(&z, w0, 1e-6, 500);
    assert!(converged);
    // W should undo the rotation up to sign and order
    let r = &w
        * nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
        );
    for i in 0..2 {
        let row_max = r.row(i).abs().max();
        assert!(row_max > 0.99, "{r}");
    }
    let d = symmetric_decorrelation(&nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[2.0, 1.0, 0.0, 1.0],
    ));
    assert!(
        ((&d * d.transpose()) - nalgebra::DMatrix::<f64>::identity(2, 2))
            .abs()
            .max()
            < 1e-12
    );
}

#[test]
fn nmf_masks_partition_and_monotone() {
    let x = IqBuffer::new(
        complex_noise(30_000, 1.0, SeedContext::new(6, 0, StreamTag::Noise)),
        CORPUS_RATE_HZ,
    )
    .unwrap();
    let out = nmf_separate(&x, 3, ctx(6)).unwrap();
    assert_eq!(out.objective.len(), 501);
    for w in out.objective.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
    }
    assert!(out.w.iter().chain(out.h.iter()).all(|&v| v >= 0.0));
    let masks = wiener_masks(&out.w, &out.h);
    for (b, f) in [(0, 0), (10, 20), (500, 40)] {
        let s: f64 = masks.iter().map(|m| m[(b, f)]).sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
    let total = out
        .estimates
        .iter()
        .skip(1)
        .fold(out.estimates[0].clone(), |a, e| sum(&a, e));
    assert!(rms_diff(&total.samples, &x.samples) <= 1e-3);
    assert_eq!(out, nmf_separate(&x, 3, ctx(6)).unwrap());
}

#[test]
fn nmf_factorizes_low_rank_exactly_enough() {
    let w = ndarray::Array2::from_shape_fn((40, 2), |(i, j)| ((i + 1) * (j + 2) % 7) as f64 + 0.5);
    let h = ndarray::Array2::from_shape_fn((2, 30), |(i, j)| ((i + 3) * (j + 1) % 5) as f64 + 0.1);
    let v = w.dot(&h);
    let (_, _, obj) = nmf(&v, 2, 500, ctx(7));
    let norm: f64 = v.iter().map(|x| x * x).sum();
    assert!(obj[500] / norm < 1e-3, "{}", obj[500] / norm);
}

fn gsm_lte_disjoint() -> (IqBuffer, IqBuffer) {
    let gsm_cfg = WaveformConfig::new(StandardId::Gsm);
    let lte_cfg = WaveformConfig::new(StandardId::Lte);
    let g = generate(&gsm_cfg, SeedContext::new(8, 0, StreamTag::Bits)).unwrap();
    let l = generate(&lte_cfg, SeedContext::new(8, 1, StreamTag::Bits)).unwrap();
    (
        frequency_shift(&g, -10e6, gsm_cfg.nominal_bandwidth_hz()).unwrap(),
        frequency_shift(&l, 5e6, lte_cfg.nominal_bandwidth_hz()).unwrap(),
    )
}

#[test]
fn nmf_disjoint_bands_with_independent_activity() {
    let (gs, ls) = gsm_lte_disjoint();
    let gated = gs.with_samples(
        gs.samples
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if (i / 8192) % 2 == 0 {
                    *v
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
    );
    let x = sum(&gated, &ls);
    for seed in 0..3 {
        let out = nmf_separate(&x, 2, ctx(80 + seed)).unwrap();
        let pit = pit_si_sinr(&out.estimates, &[gated.clone(), ls.clone()]).unwrap();
        assert!(pit.mean_db > 5.0, "seed {seed}: {}", pit.mean_db);
    }
}

#[test]
fn nmf_stationary_disjoint_bands_fit_beats_band_split() {
    // with constant activity the Frobenius optimum mixes bands rather than isolating them
    let (gs, ls) = gsm_lte_disjoint();
    let x = sum(&gs, &ls);
    let grid = stft(&x.samples, STFT_NFFT, STFT_HOP);
    let v = ndarray::Array2::from_shape_fn((STFT_NFFT, grid.num_frames()), |(b, f)| {
        grid.frames[f][b].norm()
    });
    let w0 = ndarray::Array2::from_shape_fn((STFT_NFFT, 2), |(b, k)| {
        let in_gsm = (680..700).contains(&b);
        if (k == 0) == in_gsm {
            1.0
        } else {
            1e-3
        }
    });
    let h0 = ndarray::Array2::from_elem((2, grid.num_frames()), 1.0);
    let (_, _, split) = nmf_from(&v, w0, h0, NMF_ITERATIONS);
    let out = nmf_separate(&x, 2, ctx(8)).unwrap();
    assert!(out.objective[NMF_ITERATIONS] < split[NMF_ITERATIONS]);
}
