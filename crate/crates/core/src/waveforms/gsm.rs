//! GMSK generator (BT = 0.3, h = 0.5, 270.833 ksym/s).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::{expect_standard, StandardId, WaveformConfig};
use crate::dsp::{design_filter, resample, FilterSpec};
use crate::error::Result;
use crate::iq::IqBuffer;
use crate::rng::SeedContext;
use crate::CORPUS_RATE_HZ;

pub const SYMBOL_RATE_HZ: f64 = 13e6 / 48.0;
pub const BT: f64 = 0.3;
pub const MODULATION_INDEX: f64 = 0.5;
/// Native oversampling; 16 x 270.833 kHz = 13/3 MHz reaches 30.72 MHz through
/// 48/13 and then 48/25.
pub const SAMPLES_PER_SYMBOL: usize = 16;
const INTERMEDIATE_RATE_HZ: f64 = 16e6;
const GUARD_SYMBOLS: usize = 16;

pub fn native_rate_hz() -> f64 {
    SYMBOL_RATE_HZ * SAMPLES_PER_SYMBOL as f64
}

/// Maps raw bits to +-1 symbols through differential encoding
/// (`d'_k = d_k xor d_{k-1}`, `a_k = 1 - 2 d'_k`), starting from a 1 bit.
pub fn differential_encode(bits: &[u8]) -> Vec<f64> {
    let mut prev = 1u8;
    bits.iter()
        .map(|&b| {
            let d = (b & 1) ^ prev;
            prev = b & 1;
            1.0 - 2.0 * d as f64
        })
        .collect()
}

/// Continuous-phase modulation of `symbols` with the Gaussian frequency
/// pulse. Returns `symbols.len() * sps` samples; the phase of each symbol
/// accumulates `pi * h * a_k` once its pulse has fully passed.
pub fn gmsk_modulate(symbols: &[f64], sps: usize) -> Result<Vec<Complex64>> {
    let taps = design_filter(&FilterSpec::gmsk(BT, sps))?;
    let n = symbols.len() * sps;
    let mut freq = vec![0.0; n + taps.len()];
    for (k, &a) in symbols.iter().enumerate() {
        for (j, &g) in taps.iter().enumerate() {
            freq[k * sps + j] += a * g;
        }
    }
    let mut phase = 0.0;
    Ok(freq[..n]
        .iter()
        .map(|&f| {
            phase += PI * MODULATION_INDEX * f;
            Complex64::from_polar(1.0, phase)
        })
        .collect())
}

/// Continuous (non-bursted) GMSK stream at 30.72 MHz.
pub fn gen_gsm(cfg: &WaveformConfig, ctx: SeedContext) -> Result<IqBuffer> {
    expect_standard(cfg, StandardId::Gsm)?;
    let ratio = CORPUS_RATE_HZ / native_rate_hz();
    let native_needed = (cfg.duration_samples as f64 / ratio).ceil() as usize;
    let num_symbols = native_needed.div_ceil(SAMPLES_PER_SYMBOL) + 2 * GUARD_SYMBOLS;

    let mut rng = ctx.stream();
    let bits: Vec<u8> = (0..num_symbols).map(|_| rng.gen_range(0..2u8)).collect();
    let symbols = differential_encode(&bits);
    let native = IqBuffer::new(gmsk_modulate(&symbols, SAMPLES_PER_SYMBOL)?, native_rate_hz())?;

    let mid = resample(&native, INTERMEDIATE_RATE_HZ)?;
    let out = resample(&mid, CORPUS_RATE_HZ)?;
    let skip = (GUARD_SYMBOLS as f64 * SAMPLES_PER_SYMBOL as f64 * ratio).ceil() as usize;
    let mut buf = out.with_samples(out.samples[skip..skip + cfg.duration_samples].to_vec());
    buf.normalize_power(1.0);
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::spectral::{papr_db, welch};
    use crate::rng::StreamTag;

    fn cfg() -> WaveformConfig {
        WaveformConfig::new(StandardId::Gsm)
    }

    #[test]
    fn isolated_symbol_advances_phase_by_quarter_turn() {
        let sps = 16;
        let mut symbols = vec![0.0; 9];
        symbols[4] = 1.0;
        let y = gmsk_modulate(&symbols, sps).unwrap();
        let total = y.last().unwrap().arg() - y[0].arg();
        assert!((total - PI / 2.0).abs() <= 1e-6, "phase {total}");
    }

    #[test]
    fn all_ones_is_a_tone_at_quarter_symbol_rate() {
        let sps = SAMPLES_PER_SYMBOL;
        let y = gmsk_modulate(&vec![1.0; 400], sps).unwrap();
        // steady state: pi/2 per symbol
        let a = y[100 * sps];
        let b = y[300 * sps];
        let dphi = (b * a.conj()).arg();
        let expected = 200.0 * PI / 2.0;
        let wrapped = (expected + PI).rem_euclid(2.0 * PI) - PI;
        assert!((dphi - wrapped).abs() < 1e-9);
        let per_symbol = (y[100 * sps + sps] * y[100 * sps].conj()).arg();
        let f = per_symbol / (2.0 * PI * sps as f64) * native_rate_hz();
        assert!((f - SYMBOL_RATE_HZ / 4.0).abs() < 1.0, "tone at {f}");
        assert!((SYMBOL_RATE_HZ / 4.0 - 67_708.3).abs() < 0.1);
    }

    #[test]
    fn differential_encoding_marks_transitions() {
        assert_eq!(differential_encode(&[1, 1, 0, 0, 1]), vec![1.0, 1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn output_shape_power_and_envelope() {
        let ctx = SeedContext::new(42, 0, StreamTag::Bits);
        let x = gen_gsm(&cfg(), ctx).unwrap();
        assert_eq!(x.len(), crate::SAMPLE_LEN);
        assert_eq!(x.sample_rate_hz, CORPUS_RATE_HZ);
        assert!((x.power() - 1.0).abs() <= 1e-6);
        let env_db: Vec<f64> = x.samples.iter().map(|s| 20.0 * s.norm().log10()).collect();
        let lo = env_db.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = env_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo <= 0.2, "envelope spread {} dB", hi - lo);
        assert!(papr_db(&x.samples) <= 2.0);
    }

    #[test]
    fn occupied_bandwidth_near_200_khz() {
        let x = gen_gsm(&cfg(), SeedContext::new(1, 5, StreamTag::Bits)).unwrap();
        let bw = welch(&x.samples, x.sample_rate_hz, 4096, 2048).occupied_bandwidth(0.99);
        assert!((160e3..=260e3).contains(&bw), "bw {bw}");
    }

    #[test]
    fn wrong_standard_is_rejected() {
        let bad = WaveformConfig::new(StandardId::Lte);
        assert!(gen_gsm(&bad, SeedContext::new(0, 0, StreamTag::Bits)).is_err());
    }
}
