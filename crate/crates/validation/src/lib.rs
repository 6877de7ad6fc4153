//! End-to-end acceptance checks. Each criterion returns an [`Outcome`]
//! with the measured values; `tests/acceptance.rs` runs them all.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::atomic::AtomicBool;

use num_complex::Complex64;
use rand::Rng;
use rfss_baselines::nmf::{wiener_masks, MASK_EPS};
use rfss_baselines::{evaluate_baseline, nmf_separate, EvalOptions, GeneratedCorpus, Method};
use rfss_cli::generate::generate;
use rfss_cli::RunConfig;
use rfss_core::channel::{complex_noise, draw_channel, JakesProcess, TdlKind};
use rfss_core::dsp::spectral::welch;
use rfss_core::impairments::{apply_iq_imbalance, apply_phase_noise, iq_gains, rapp};
use rfss_core::metrics::{characterize, pit_si_sinr, si_sinr, SI_SINR_CAP_DB};
use rfss_core::mixer::{
    draw_scenario, MixingMode, PipelineConfig, SampleGenerator, SOURCE_COUNT_WEIGHTS,
};
use rfss_core::waveforms::ofdm::{evm, lte_frame, nr_frame, ofdm_demodulate};
use rfss_core::waveforms::{generate as generate_waveform, QamOrder, StandardId, WaveformConfig};
use rfss_core::{IqBuffer, SeedContext, StreamTag, CORPUS_RATE_HZ, MAX_SOURCES, SAMPLE_LEN};
use rfss_io::{split_indices, Backend, CorpusReader, CorpusWriter, SplitSpec, WriterOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    /// Conjunction of several sub-checks; the detail lists every one.
    fn all(parts: Vec<Outcome>) -> Self {
        let pass = parts.iter().all(|p| p.pass);
        let detail = parts
            .iter()
            .map(|p| format!("{}{}", if p.pass { "" } else { "FAILED " }, p.detail))
            .collect::<Vec<_>>()
            .join("; ");
        Self { pass, detail }
    }
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub run: fn() -> Outcome,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion {
        id: 1,
        name: "determinism",
        run: determinism,
    },
    Criterion {
        id: 2,
        name: "waveform conformance",
        run: waveform_conformance,
    },
    Criterion {
        id: 3,
        name: "OFDM loopback",
        run: ofdm_loopback,
    },
    Criterion {
        id: 4,
        name: "channel statistics",
        run: channel_statistics,
    },
    Criterion {
        id: 5,
        name: "impairment closed forms",
        run: impairment_closed_forms,
    },
    Criterion {
        id: 6,
        name: "scenario statistics",
        run: scenario_statistics,
    },
    Criterion {
        id: 7,
        name: "format parity",
        run: format_parity,
    },
    Criterion {
        id: 8,
        name: "metric correctness",
        run: metric_correctness,
    },
    Criterion {
        id: 9,
        name: "classical baseline ranking",
        run: baseline_ranking,
    },
    Criterion {
        id: 10,
        name: "adjacent-channel floor",
        run: adjacent_floor,
    },
    Criterion {
        id: 11,
        name: "NMF internals",
        run: nmf_internals,
    },
];

fn noise(n: usize, seed: u64) -> IqBuffer {
    IqBuffer::new(
        complex_noise(n, 1.0, SeedContext::new(seed, 0, StreamTag::Noise)),
        CORPUS_RATE_HZ,
    )
    .expect("positive rate")
}

fn add(a: &IqBuffer, b: &IqBuffer, gain: f64) -> IqBuffer {
    a.with_samples(
        a.samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| x + y * gain)
            .collect(),
    )
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

pub fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut parts = Vec::new();
    for backend in [Backend::Hdf5, Backend::Manifest] {
        let run = |tag: &str| {
            let name = match backend {
                Backend::Hdf5 => format!("{tag}.h5"),
                Backend::Manifest => tag.to_string(),
            };
            let cfg = RunConfig {
                master_seed: 42,
                corpus_size: 200,
                out_path: dir.path().join(name),
                backend,
                ..RunConfig::default()
            };
            generate(&cfg, &AtomicBool::new(false)).expect("generation succeeds")
        };
        let a = run("a");
        let b = run("b");
        let companion =
            |s: &rfss_cli::generate::GenerateSummary| s.single.as_ref().map(|x| x.2.clone());
        parts.push(Outcome::new(
            a.digest == b.digest && companion(&a) == companion(&b),
            format!(
                "{backend}: digests {} {} ({:.0} s per run)",
                &a.digest[..12],
                if a.digest == b.digest {
                    "equal"
                } else {
                    "differ"
                },
                a.wall_time.as_secs_f64()
            ),
        ));
    }
    Outcome::all(parts)
}

pub fn waveform_conformance() -> Outcome {
    let mut papr: HashMap<StandardId, Vec<f64>> = HashMap::new();
    let mut bw: HashMap<StandardId, Vec<f64>> = HashMap::new();
    for st in StandardId::ALL {
        for seed in 0..100 {
            let x = generate_waveform(
                &WaveformConfig::new(st),
                SeedContext::new(seed, 0, StreamTag::Bits),
            )
            .expect("default config is valid");
            let c = characterize(&x).expect("full-length signal");
            papr.entry(st).or_default().push(c.papr_db);
            bw.entry(st).or_default().push(c.occupied_bw_hz);
        }
    }
    let (_, gsm_papr) = min_max(&papr[&StandardId::Gsm]);
    let mut parts = vec![Outcome::new(
        gsm_papr <= 2.0,
        format!("GSM PAPR max {gsm_papr:.2} dB <= 2"),
    )];
    for st in [StandardId::Lte, StandardId::Nr] {
        let v = &papr[&st];
        let inside = v.iter().filter(|p| (8.0..=13.0).contains(*p)).count() as f64 / v.len() as f64;
        let (lo, hi) = min_max(v);
        parts.push(Outcome::new(
            inside >= 0.95,
            format!(
                "{st} PAPR in [8, 13] dB for {:.0}% (range {lo:.2}..{hi:.2})",
                inside * 100.0
            ),
        ));
    }
    for (st, lo_lim, hi_lim) in [
        (StandardId::Gsm, 160e3, 260e3),
        (StandardId::Umts, 4.2e6, 5.2e6),
        (StandardId::Lte, 8.1e6, 9.9e6),
    ] {
        let (lo, hi) = min_max(&bw[&st]);
        parts.push(Outcome::new(
            lo >= lo_lim && hi <= hi_lim,
            format!(
                "{st} 99% bandwidth {:.3}..{:.3} MHz in [{}, {}]",
                lo / 1e6,
                hi / 1e6,
                lo_lim / 1e6,
                hi_lim / 1e6
            ),
        ));
    }
    Outcome::all(parts)
}

pub fn ofdm_loopback() -> Outcome {
    let mut worst: f64 = 0.0;
    for st in [StandardId::Lte, StandardId::Nr] {
        for qam in QamOrder::ALL {
            for seed in 0..5 {
                let mut cfg = WaveformConfig::new(st);
                cfg.qam_order = qam;
                let ctx = SeedContext::new(seed, 0, StreamTag::Bits);
                let frame = match st {
                    StandardId::Lte => lte_frame(&cfg, ctx),
                    _ => nr_frame(&cfg, ctx),
                }
                .expect("default config is valid");
                let n = frame.params.symbols_for(frame.signal.len()) - 1;
                let rx = ofdm_demodulate(&frame.params, &frame.signal.samples, n);
                worst = worst.max(evm(&rx, &frame.grid[..rx.len()]));
            }
        }
    }
    Outcome::new(
        worst <= 0.01,
        format!(
            "worst EVM {:.2e} over LTE/NR, all QAM orders, 5 seeds",
            worst
        ),
    )
}

/// Rician K from the first two moments of the tap power.
fn moment_k_db(gains: &[Complex64]) -> f64 {
    let p: Vec<f64> = gains.iter().map(|g| g.norm_sqr()).collect();
    let m = mean(&p);
    let v = p.iter().map(|x| (x - m).powi(2)).sum::<f64>() / p.len() as f64;
    let s = (1.0 - v / (m * m)).sqrt();
    10.0 * (s / (1.0 - s)).log10()
}

pub fn channel_statistics() -> Outcome {
    let mut gains = Vec::new();
    let mut i = 0;
    while gains.len() < 40_000 {
        let ch = draw_channel(
            SeedContext::new(4, i, StreamTag::Channel),
            SAMPLE_LEN,
            CORPUS_RATE_HZ,
        );
        i += 1;
        if ch.profile.name == TdlKind::D {
            let tap = &ch.taps[0];
            let scale = tap.power.sqrt();
            gains.extend((0..20).map(|j| tap.gain_at(j as f64 * 2e-4) / scale));
        }
    }
    let k = moment_k_db(&gains);

    let fd = 100.0;
    let mut rng = SeedContext::new(4, 0, StreamTag::Channel)
        .with_lane(1)
        .stream();
    let procs: Vec<JakesProcess> = (0..2000)
        .map(|_| JakesProcess::draw(fd, None, &mut rng))
        .collect();
    let corr = |tau: f64| {
        mean(
            &procs
                .iter()
                .map(|p| (p.gain_at(0.0) * p.gain_at(tau).conj()).re)
                .collect::<Vec<_>>(),
        )
    };
    let dt = 5e-5;
    let mut tau = dt;
    while corr(tau) > 0.0 && tau < 0.02 {
        tau += dt;
    }
    let j0_zero = 2.404_825_557_695_773 / (2.0 * PI * fd);

    let n = 10_000;
    let mut counts: HashMap<TdlKind, usize> = HashMap::new();
    for i in 0..n {
        let ch = draw_channel(
            SeedContext::new(44, i, StreamTag::Channel),
            16,
            CORPUS_RATE_HZ,
        );
        *counts.entry(ch.profile.name).or_default() += 1;
    }
    let freqs: Vec<f64> = TdlKind::ALL
        .iter()
        .map(|k| counts.get(k).copied().unwrap_or(0) as f64 / n as f64)
        .collect();
    let dev = freqs.iter().map(|f| (f - 0.2).abs()).fold(0.0, f64::max);

    Outcome::all(vec![
        Outcome::new((k - 13.3).abs() <= 1.0, format!("TDL-D K = {k:.2} dB")),
        Outcome::new(
            (tau - j0_zero).abs() <= 0.1 * j0_zero,
            format!(
                "Jakes first zero {:.3} ms vs J0 {:.3} ms",
                tau * 1e3,
                j0_zero * 1e3
            ),
        ),
        Outcome::new(dev <= 0.02, format!("profile frequencies {freqs:.3?}")),
    ])
}

pub fn impairment_closed_forms() -> Outcome {
    let n = 4096;
    let k = 300;
    let tone = IqBuffer::new(
        (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (k * i) as f64 / n as f64))
            .collect(),
        CORPUS_RATE_HZ,
    )
    .expect("positive rate");
    let mut worst_irr: f64 = 0.0;
    for a in 0..5 {
        for p in 0..5 {
            let amp = 0.1 + 2.9 * a as f64 / 4.0;
            let phase = 1.0 + 9.0 * p as f64 / 4.0;
            let y = rfss_core::dsp::fft(&apply_iq_imbalance(&tone, amp, phase).samples);
            let measured = 10.0 * (y[k].norm_sqr() / y[n - k].norm_sqr()).log10();
            let (g1, g2) = iq_gains(amp, phase);
            let closed = 10.0 * (g1.norm_sqr() / g2.norm_sqr()).log10();
            worst_irr = worst_irr.max((measured - closed).abs());
        }
    }

    let a_sat = 0.8;
    let y = rapp(Complex64::new(a_sat, 0.0), a_sat, 2.0).norm();
    let rapp_err = (y - a_sat * 2f64.powf(-0.25)).abs();

    let level = -100.0;
    let len = SAMPLE_LEN;
    let nfft = 30_720;
    let ones =
        IqBuffer::new(vec![Complex64::new(1.0, 0.0); len], CORPUS_RATE_HZ).expect("positive rate");
    let mut acc = 0.0;
    for i in 0..100 {
        let y = apply_phase_noise(&ones, level, SeedContext::new(5, i, StreamTag::Impairment));
        let phi: Vec<Complex64> = y
            .samples
            .iter()
            .map(|s| Complex64::new(s.arg(), 0.0))
            .collect();
        let m = phi.iter().sum::<Complex64>() / len as f64;
        let centered: Vec<Complex64> = phi.iter().map(|p| p - m).collect();
        let psd = welch(&centered, CORPUS_RATE_HZ, nfft, nfft / 2);
        let idx = psd
            .freqs_hz
            .iter()
            .position(|&f| (f - 10e3).abs() < 1.0)
            .expect("1 kHz grid");
        acc += psd.density[idx] + psd.density[nfft - idx];
    }
    let measured = 10.0 * (acc / 100.0 / 2.0).log10();

    Outcome::all(vec![
        Outcome::new(
            worst_irr <= 0.1,
            format!("IRR worst error {worst_irr:.4} dB over 5x5 grid"),
        ),
        Outcome::new(rapp_err <= 1e-9, format!("Rapp |y| error {rapp_err:.1e}")),
        Outcome::new(
            (measured - level).abs() <= 3.0,
            format!("phase noise {measured:.2} dBc/Hz at 10 kHz vs {level}"),
        ),
    ])
}

pub fn scenario_statistics() -> Outcome {
    let n = 100_000;
    let mut counts = [0usize; MAX_SOURCES + 1];
    let mut co = 0usize;
    for i in 0..n {
        let s = draw_scenario(SeedContext::new(42, i, StreamTag::Scenario));
        counts[s.num_sources] += 1;
        co += (s.mode == MixingMode::CoChannel) as usize;
    }
    let mut parts: Vec<Outcome> = SOURCE_COUNT_WEIGHTS
        .iter()
        .map(|&(k, w)| {
            let f = counts[k] as f64 / n as f64;
            Outcome::new(
                (f - w).abs() <= 0.01,
                format!("{k} sources {f:.4} (target {w})"),
            )
        })
        .collect();
    let balance = co as f64 / n as f64;
    parts.push(Outcome::new(
        (balance - 0.5).abs() <= 0.01,
        format!("co-channel share {balance:.4}"),
    ));
    Outcome::all(parts)
}

fn check_layout(path: &Path, samples: &[rfss_core::mixer::MixtureSample]) -> Outcome {
    let r = CorpusReader::open(path).expect("corpus opens");
    let n = samples.len();
    let shapes = r.shapes();
    let expected = [
        vec![n, SAMPLE_LEN],
        vec![n, MAX_SOURCES, SAMPLE_LEN],
        vec![n],
        vec![n],
    ];
    let mut padded = true;
    let mut round_trip = true;
    for (row, s) in samples.iter().enumerate() {
        let sources = r.read_sources(row).expect("row reads");
        padded &= sources[s.metadata.num_sources..]
            .iter()
            .all(|slot| slot.samples.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        round_trip &= r.read_metadata(row).expect("metadata parses") == s.metadata;
    }
    Outcome::new(
        shapes == expected && padded && round_trip,
        format!(
            "{}: shapes {:?}, unused slots zero {padded}, metadata round-trip {round_trip}",
            r.backend(),
            &shapes[..2]
        ),
    )
}

pub fn format_parity() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let generator = SampleGenerator::new(42, PipelineConfig::default());
    let samples: Vec<_> = (0..10)
        .map(|i| generator.generate(i).expect("sample generates"))
        .collect();
    let mut parts = Vec::new();
    for (backend, name) in [(Backend::Hdf5, "parity.h5"), (Backend::Manifest, "parity")] {
        let path = dir.path().join(name);
        let opts = WriterOptions {
            first_index: 0,
            sample_len: SAMPLE_LEN,
        };
        let mut w = CorpusWriter::create(&path, backend, opts).expect("writer opens");
        for (i, s) in samples.iter().enumerate() {
            w.write_sample(i as u64, s).expect("row writes");
        }
        w.finish().expect("writer finishes");
        parts.push(check_layout(&path, &samples));
    }
    let s = split_indices(SplitSpec::default(), 100_000);
    let (train_end, val_end) = (s.train.len(), s.train.len() + s.val.len());
    parts.push(Outcome::new(
        train_end == 70_000 && val_end == 85_000 && s.test.last() == Some(&99_999),
        format!("splits at N=100000: {train_end}/{val_end}"),
    ));
    Outcome::all(parts)
}

fn heap_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    let mut out = vec![a.clone()];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

pub fn metric_correctness() -> Outcome {
    let mut rng = SeedContext::new(8, 0, StreamTag::Scenario).stream();
    let mut worst_scale: f64 = 0.0;
    for t in 0..1000u64 {
        let r = noise(512, t);
        let est = add(&r, &noise(512, t + 100_000), rng.gen_range(0.1..2.0));
        let c = Complex64::from_polar(10f64.powf(rng.gen_range(-3.0..3.0)), rng.gen_range(-PI..PI));
        let scaled = est.with_samples(est.samples.iter().map(|v| v * c).collect());
        let a = si_sinr(&est, &r).expect("defined");
        let b = si_sinr(&scaled, &r).expect("defined");
        worst_scale = worst_scale.max((a - b).abs());
    }

    let n = 1024;
    let tone = |k: usize| {
        IqBuffer::new(
            (0..n)
                .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (k * i) as f64 / n as f64))
                .collect(),
            CORPUS_RATE_HZ,
        )
        .expect("positive rate")
    };
    let ortho = si_sinr(&add(&tone(5), &tone(17), 1.0), &tone(5)).expect("defined");

    let mut worst_pit: f64 = 0.0;
    for case in 0..100u64 {
        let refs: Vec<IqBuffer> = (0..3).map(|j| noise(256, 1000 + case * 10 + j)).collect();
        let order = rand::seq::index::sample(&mut rng, 3, 3).into_vec();
        let ests: Vec<IqBuffer> = order
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                add(
                    &refs[j],
                    &noise(256, 50_000 + case * 10 + i as u64),
                    rng.gen_range(0.1..2.0),
                )
            })
            .collect();
        let got = pit_si_sinr(&ests, &refs).expect("defined").mean_db;
        let best = heap_permutations(3)
            .iter()
            .map(|p| {
                mean(
                    &(0..3)
                        .map(|j| si_sinr(&ests[p[j]], &refs[j]).expect("defined"))
                        .collect::<Vec<_>>(),
                )
            })
            .fold(f64::NEG_INFINITY, f64::max);
        worst_pit = worst_pit.max((got - best).abs());
    }

    Outcome::all(vec![
        Outcome::new(
            worst_scale <= 1e-9,
            format!("scale invariance worst {worst_scale:.1e} dB over 1000 trials"),
        ),
        Outcome::new(
            ortho.abs() <= 1e-6,
            format!("orthogonal residual {ortho:.1e} dB"),
        ),
        Outcome::new(
            worst_pit <= 1e-12,
            format!("PIT vs brute force worst {worst_pit:.1e} dB over 100 cases"),
        ),
    ])
}

pub fn baseline_ranking() -> Outcome {
    let src = GeneratedCorpus {
        generator: SampleGenerator::new(42, PipelineConfig::default()),
        size: 2000,
    };
    let score = |method| {
        let mut opts = EvalOptions::new(method, 50);
        opts.source_counts = vec![2];
        opts.mode = Some(MixingMode::CoChannel);
        let records = evaluate_baseline(&src, &opts).expect("evaluation runs");
        (
            records.len(),
            mean(&records.iter().map(|r| r.pi_si_sinr_db).collect::<Vec<_>>()),
        )
    };
    let (n_ica, ica) = score(Method::Ica);
    let (n_nmf, nmf) = score(Method::Nmf);
    Outcome::all(vec![
        Outcome::new(
            n_ica == 50 && n_nmf == 50,
            format!("{n_ica} ICA and {n_nmf} NMF samples"),
        ),
        Outcome::new(
            nmf - ica >= 5.0,
            format!(
                "NMF {nmf:.2} dB minus ICA {ica:.2} dB = {:.2} dB",
                nmf - ica
            ),
        ),
        Outcome::new(ica <= -20.0, format!("ICA mean {ica:.2} dB <= -20")),
    ])
}

pub fn adjacent_floor() -> Outcome {
    let generator = SampleGenerator::new(42, PipelineConfig::default());
    let (mut adjacent, mut co) = (Vec::new(), Vec::new());
    let mut i = 0;
    while adjacent.len() < 20 || co.len() < 20 {
        let mode = generator.scenario(i).mode;
        match mode {
            MixingMode::AdjacentChannel if adjacent.len() < 20 => {
                let trace = generator.generate_traced(i).expect("sample generates");
                let placed: Vec<IqBuffer> =
                    trace.sources.iter().map(|s| s.placed.clone()).collect();
                adjacent.push(
                    pit_si_sinr(&placed, &trace.sample.targets)
                        .expect("defined")
                        .mean_db,
                );
            }
            MixingMode::CoChannel if co.len() < 20 => {
                let s = generator.generate(i).expect("sample generates");
                co.push(
                    pit_si_sinr(&s.targets, &s.targets)
                        .expect("defined")
                        .mean_db,
                );
            }
            _ => {}
        }
        i += 1;
    }
    let (adj_lo, adj_hi) = min_max(&adjacent);
    let (co_lo, _) = min_max(&co);
    Outcome::all(vec![
        Outcome::new(
            adj_hi <= -20.0,
            format!(
                "adjacent true sources vs targets: mean {:.2} dB, range {adj_lo:.2}..{adj_hi:.2}",
                mean(&adjacent)
            ),
        ),
        Outcome::new(
            co_lo == SI_SINR_CAP_DB,
            format!("co-channel oracle min {co_lo} dB"),
        ),
    ])
}

pub fn nmf_internals() -> Outcome {
    let generator = SampleGenerator::new(42, PipelineConfig::default());
    let mut monotone = true;
    let mut worst_partition: f64 = 0.0;
    let mut worst_rms: f64 = 0.0;
    let mut silent = 0usize;
    for i in 0..20 {
        let s = generator.generate(i).expect("sample generates");
        let k = s.metadata.num_sources;
        let out = nmf_separate(&s.mixture, k, SeedContext::new(11, i, StreamTag::Scenario))
            .expect("NMF runs");
        monotone &= out.objective.len() == 501
            && out
                .objective
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        let masks = wiener_masks(&out.w, &out.h);
        let model = out.w.dot(&out.h);
        for ((b, f), &t) in model.indexed_iter() {
            let sum: f64 = masks.iter().map(|m| m[(b, f)]).sum();
            // the epsilon in the denominator allows a shortfall of eps / (t + eps)
            let excess = (1.0 - sum).abs() - MASK_EPS / (t + MASK_EPS);
            worst_partition = worst_partition.max(excess);
            silent += (t < 1e-6) as usize;
        }
        let total: Vec<Complex64> = (0..s.mixture.len())
            .map(|n| out.estimates.iter().map(|e| e.samples[n]).sum())
            .collect();
        let rms = (total
            .iter()
            .zip(&s.mixture.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / total.len() as f64)
            .sqrt();
        worst_rms = worst_rms.max(rms);
    }
    Outcome::all(vec![
        Outcome::new(
            monotone,
            format!("objective non-increasing over 500 iterations on 20 samples: {monotone}"),
        ),
        Outcome::new(
            worst_partition <= 1e-12,
            format!("mask sums within eps/(model + eps) of 1, worst excess {worst_partition:.1e} ({silent} silent bins)"),
        ),
        Outcome::new(
            worst_rms <= 1e-3,
            format!("estimate sum vs mixture worst RMS {worst_rms:.1e}"),
        ),
    ])
}
