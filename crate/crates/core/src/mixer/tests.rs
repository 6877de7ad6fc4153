use std::collections::HashSet;

use super::*;
use crate::dsp::spectral::welch;
use crate::impairments::ImpairmentDraw;

fn tone(k: usize, n: usize) -> IqBuffer {
    let s = (0..n)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (k * i) as f64 / n as f64))
        .collect();
    IqBuffer::new(s, CORPUS_RATE_HZ).unwrap()
}

fn short_gen(seed: u64) -> SampleGenerator {
    SampleGenerator::new(
        seed,
        PipelineConfig {
            sample_len: Some(16_384),
            ..Default::default()
        },
    )
}

#[test]
fn scenario_statistics() {
    let n = 100_000;
    let mut counts = [0usize; 5];
    let mut co = 0usize;
    let mut subsets: HashSet<Vec<StandardId>> = HashSet::new();
    for i in 0..n {
        let s = draw_scenario(SeedContext::new(42, i, StreamTag::Scenario));
        counts[s.num_sources] += 1;
        if s.mode == MixingMode::CoChannel {
            co += 1;
            assert!(s.freq_offsets_hz.iter().all(|&f| f == 0.0));
        }
        let mut sorted = s.standards.clone();
        sorted.sort_by_key(|s| *s as u8);
        sorted.dedup();
        assert_eq!(sorted.len(), s.num_sources);
        subsets.insert(sorted);
        assert!(s.snr_db.iter().all(|v| (0.0..=30.0).contains(v)));
        assert!(s.powers_db.iter().all(|v| v.abs() <= POWER_SPREAD_DB));
        assert!(s.timing_offsets_samples.iter().all(|&t| t <= MAX_TIMING_OFFSET));
    }
    for (k, w) in SOURCE_COUNT_WEIGHTS {
        let f = counts[k] as f64 / n as f64;
        assert!((f - w).abs() <= 0.01, "{k}: {f}");
    }
    assert!((co as f64 / n as f64 - 0.5).abs() <= 0.01);
    // C(4,2) + C(4,3) + C(4,4)
    assert_eq!(subsets.len(), 6 + 4 + 1);
}

#[test]
fn adjacent_plan_has_guard_bands() {
    let mut bands: Vec<(f64, f64)> = StandardId::ALL
        .iter()
        .map(|&s| {
            let mut cfg = WaveformConfig::new(s);
            if s == StandardId::Nr {
                cfg.occupied_subcarriers = crate::waveforms::NR_ADJACENT_SUBCARRIERS;
            }
            let f = adjacent_offset_hz(s);
            let half = cfg.nominal_bandwidth_hz() / 2.0;
            (f - half, f + half)
        })
        .collect();
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(bands[0].0 >= -CORPUS_RATE_HZ / 2.0);
    assert!(bands[3].1 <= CORPUS_RATE_HZ / 2.0);
    for w in bands.windows(2) {
        assert!(w[1].0 - w[0].1 >= 100e3, "{w:?}");
    }
}

#[test]
fn frequency_shift_contract() {
    let x = tone(10, 4096);
    assert_eq!(frequency_shift(&x, 0.0, 1e6).unwrap(), x);
    let y = frequency_shift(&x, 3.3e6, 1e6).unwrap();
    let back = frequency_shift(&y, -3.3e6, 1e6).unwrap();
    let err: f64 = x.samples.iter().zip(&back.samples).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 4096.0;
    assert!(err.sqrt() <= 1e-12);
    assert!(frequency_shift(&x, 15e6, 1e6).is_err());
}

#[test]
fn gsm_shift_centroid() {
    let cfg = WaveformConfig::new(StandardId::Gsm);
    let x = generate(&cfg, SeedContext::new(3, 0, StreamTag::Bits)).unwrap();
    let y = frequency_shift(&x, -12e6, cfg.nominal_bandwidth_hz()).unwrap();
    let c = welch(&y.samples, CORPUS_RATE_HZ, 4096, 2048).centroid_hz();
    assert!((c + 12e6).abs() <= 50e3, "{c}");
}

#[test]
fn cyclic_delay_rotates() {
    let x = tone(3, 64);
    let y = cyclic_delay(&x, 5);
    assert_eq!(y.samples[5], x.samples[0]);
    assert_eq!(y.samples[0], x.samples[59]);
    assert_eq!(cyclic_delay(&x, 0), x);
}

fn scenario_of(k: usize) -> ScenarioDraw {
    ScenarioDraw {
        num_sources: k,
        standards: StandardId::ALL[..k].to_vec(),
        mode: MixingMode::CoChannel,
        freq_offsets_hz: vec![0.0; k],
        powers_db: vec![0.0; k],
        timing_offsets_samples: vec![0; k],
        snr_db: vec![30.0; k],
    }
}

#[test]
fn assemble_identities() {
    let x = tone(7, 1024);
    assert_eq!(assemble(&[x.clone()], &scenario_of(1)).unwrap(), x);
    let y = assemble(&[x.clone(), tone(9, 1024)], &scenario_of(2)).unwrap();
    assert!((y.power() - 2.0).abs() <= 1e-6);
    assert!(assemble(&[x.clone()], &scenario_of(2)).is_err());
    assert!(assemble(&[x, tone(9, 512)], &scenario_of(2)).is_err());
}

#[test]
fn traced_intermediates_resum_bitwise() {
    for noise_mode in [NoiseMode::PerSource, NoiseMode::Mixture] {
        let g = SampleGenerator::new(
            5,
            PipelineConfig {
                noise_mode,
                sample_len: Some(16_384),
                ..Default::default()
            },
        );
        let t = g.generate_traced(1).unwrap();
        assert_eq!(t.resum().unwrap(), t.sample.mixture);
        assert_eq!(t.mixture_noise.is_some(), noise_mode == NoiseMode::Mixture);
    }
}

#[test]
fn targets_are_regenerable_clean_sources() {
    let g = short_gen(9);
    let s = g.generate(4).unwrap();
    assert_eq!(s.targets.len(), s.scenario.num_sources);
    for (i, t) in s.targets.iter().enumerate() {
        assert!((t.power() - 1.0).abs() <= 1e-9);
        let cfg = s.metadata.waveforms[i];
        let mut clean = generate(&cfg, SeedContext::new(9, 4, StreamTag::Bits).with_lane(i as u64)).unwrap();
        clean.normalize_power(1.0);
        assert_eq!(&clean, t);
    }
    assert_eq!(g.generate(4).unwrap(), s);
}

#[test]
fn full_length_sample() {
    let s = SampleGenerator::new(42, PipelineConfig::default()).generate(0).unwrap();
    assert_eq!(s.mixture.len(), SAMPLE_LEN);
    assert!(s.targets.iter().all(|t| t.len() == SAMPLE_LEN));
    assert!((s.metadata.mixture_power - s.mixture.power()).abs() < 1e-12);
}

#[test]
fn mode_filter_forces_mode() {
    for mode in [MixingMode::CoChannel, MixingMode::AdjacentChannel] {
        let g = SampleGenerator::new(
            1,
            PipelineConfig {
                mode_filter: Some(mode),
                ..Default::default()
            },
        );
        for i in 0..50 {
            assert_eq!(g.scenario(i).mode, mode);
        }
    }
}

#[test]
fn metadata_json_round_trip() {
    let mut s = short_gen(2).generate(3).unwrap();
    s.metadata.impairments.push(ImpairmentDraw::neutral());
    let back = SampleMetadata::from_json(&s.metadata.to_json()).unwrap();
    assert_eq!(back, s.metadata);
    assert_eq!(back.scenario(), s.scenario);
}

#[test]
fn mixture_snr_single_source() {
    let s = short_gen(2).generate_single(StandardId::Lte, 0).unwrap();
    assert_eq!(s.metadata.num_sources, 1);
    assert!((s.metadata.mixture_snr_db() - s.metadata.snr_db[0]).abs() < 1e-9);
}

#[test]
fn mode_names_parse() {
    assert_eq!("adjacent".parse::<MixingMode>().unwrap(), MixingMode::AdjacentChannel);
    assert_eq!("co_channel".parse::<MixingMode>().unwrap(), MixingMode::CoChannel);
    assert!("both".parse::<MixingMode>().is_err());
}
