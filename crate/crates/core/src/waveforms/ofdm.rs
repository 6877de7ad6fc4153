//! OFDM generators for LTE (15 kHz) and NR (30 kHz, numerology 1).

use num_complex::Complex64;

use super::{expect_standard, QamOrder, StandardId, WaveformConfig};
use super::{LTE_MAX_SUBCARRIERS, NR_MAX_SUBCARRIERS};
use crate::dsp::{fft_in_place, ifft_in_place, resample};
use crate::error::{param, Result};
use crate::iq::IqBuffer;
use crate::rng::SeedContext;
use crate::CORPUS_RATE_HZ;

/// Numerology of one OFDM carrier at a given sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmParams {
    pub fft_size: usize,
    pub sample_rate_hz: f64,
    /// Cyclic prefix of each symbol in one repeating period (a slot for LTE,
    /// half a subframe for NR).
    pub cp_pattern: Vec<usize>,
    pub occupied: usize,
}

impl OfdmParams {
    /// LTE normal CP at 15.36 MHz: 160/2048 and 144/2048 of the symbol.
    pub fn lte_native(occupied: usize) -> Self {
        Self {
            fft_size: 1024,
            sample_rate_hz: 15.36e6,
            cp_pattern: vec![80, 72, 72, 72, 72, 72, 72],
            occupied,
        }
    }

    /// NR mu = 1 normal CP at 30.72 MHz. The first of every 14 symbols
    /// (each 0.5 ms) carries the extra 16 Ts.
    pub fn nr(occupied: usize) -> Self {
        let mut cp = vec![72; 14];
        cp[0] = 88;
        Self {
            fft_size: 1024,
            sample_rate_hz: 30.72e6,
            cp_pattern: cp,
            occupied,
        }
    }

    /// Same carrier described at `factor` times the sample rate.
    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            fft_size: self.fft_size * factor,
            sample_rate_hz: self.sample_rate_hz * factor as f64,
            cp_pattern: self.cp_pattern.iter().map(|c| c * factor).collect(),
            occupied: self.occupied,
        }
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.sample_rate_hz / self.fft_size as f64
    }

    pub fn cp_len(&self, symbol: usize) -> usize {
        self.cp_pattern[symbol % self.cp_pattern.len()]
    }

    pub fn period_samples(&self) -> usize {
        self.cp_pattern.iter().map(|c| c + self.fft_size).sum()
    }

    /// Subcarrier indices relative to DC: `-N/2..=-1` then `1..=N/2`.
    pub fn subcarriers(&self) -> Vec<i64> {
        let half = (self.occupied / 2) as i64;
        (-half..0).chain(1..=half).collect()
    }

    fn bin(&self, k: i64) -> usize {
        k.rem_euclid(self.fft_size as i64) as usize
    }

    /// Number of whole symbols needed to cover `len` samples.
    pub fn symbols_for(&self, len: usize) -> usize {
        let mut total = 0;
        let mut l = 0;
        while total < len {
            total += self.cp_len(l) + self.fft_size;
            l += 1;
        }
        l
    }
}

/// IFFT + CP insertion. `grid[l][j]` sits on subcarrier `subcarriers()[j]`.
pub fn ofdm_modulate(params: &OfdmParams, grid: &[Vec<Complex64>]) -> Vec<Complex64> {
    let subcarriers = params.subcarriers();
    let n = params.fft_size;
    let mut out = Vec::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (l, symbols) in grid.iter().enumerate() {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for (&k, &x) in subcarriers.iter().zip(symbols) {
            buf[params.bin(k)] = x;
        }
        ifft_in_place(&mut buf);
        let cp = params.cp_len(l);
        out.extend_from_slice(&buf[n - cp..]);
        out.extend_from_slice(&buf);
    }
    out
}

/// CP removal + FFT, returning the occupied subcarriers of each symbol.
pub fn ofdm_demodulate(params: &OfdmParams, x: &[Complex64], num_symbols: usize) -> Vec<Vec<Complex64>> {
    let subcarriers = params.subcarriers();
    let n = params.fft_size;
    let mut pos = 0;
    let mut grid = Vec::with_capacity(num_symbols);
    for l in 0..num_symbols {
        pos += params.cp_len(l);
        if pos + n > x.len() {
            break;
        }
        let mut buf = x[pos..pos + n].to_vec();
        fft_in_place(&mut buf);
        grid.push(subcarriers.iter().map(|&k| buf[params.bin(k)]).collect());
        pos += n;
    }
    grid
}

fn random_grid(params: &OfdmParams, qam: QamOrder, symbols: usize, ctx: SeedContext) -> Vec<Vec<Complex64>> {
    let mut rng = ctx.stream();
    (0..symbols)
        .map(|_| (0..params.occupied).map(|_| qam.random_symbol(&mut rng)).collect())
        .collect()
}

fn check_occupied(cfg: &WaveformConfig, max: usize) -> Result<()> {
    let n = cfg.occupied_subcarriers;
    if n == 0 || n % 2 == 1 || n > max {
        return param(format!(
            "{} occupied subcarriers must be even and in 2..={max}, got {n}",
            cfg.standard
        ));
    }
    Ok(())
}

/// A generated OFDM signal together with the transmitted resource grid.
pub struct OfdmFrame {
    pub signal: IqBuffer,
    pub grid: Vec<Vec<Complex64>>,
    /// Numerology at the output rate, for demodulation.
    pub params: OfdmParams,
}

pub fn lte_frame(cfg: &WaveformConfig, ctx: SeedContext) -> Result<OfdmFrame> {
    expect_standard(cfg, StandardId::Lte)?;
    check_occupied(cfg, LTE_MAX_SUBCARRIERS)?;
    let native = OfdmParams::lte_native(cfg.occupied_subcarriers);
    let factor = (CORPUS_RATE_HZ / native.sample_rate_hz) as usize;
    // one spare symbol so the interpolator has future samples at the end
    let symbols = native.symbols_for(cfg.duration_samples.div_ceil(factor)) + 1;
    let grid = random_grid(&native, cfg.qam_order, symbols, ctx);
    let base = IqBuffer::new(ofdm_modulate(&native, &grid), native.sample_rate_hz)?;
    let up = resample(&base, CORPUS_RATE_HZ)?;
    let mut signal = up.with_samples(up.samples[..cfg.duration_samples].to_vec());
    signal.normalize_power(1.0);
    Ok(OfdmFrame {
        signal,
        grid,
        params: native.scaled(factor),
    })
}

pub fn nr_frame(cfg: &WaveformConfig, ctx: SeedContext) -> Result<OfdmFrame> {
    expect_standard(cfg, StandardId::Nr)?;
    if cfg.numerology_mu != 1 {
        return param(format!("only NR numerology 1 is supported, got {}", cfg.numerology_mu));
    }
    check_occupied(cfg, NR_MAX_SUBCARRIERS)?;
    let params = OfdmParams::nr(cfg.occupied_subcarriers);
    let symbols = params.symbols_for(cfg.duration_samples);
    let grid = random_grid(&params, cfg.qam_order, symbols, ctx);
    let mut samples = ofdm_modulate(&params, &grid);
    samples.truncate(cfg.duration_samples);
    let mut signal = IqBuffer::new(samples, params.sample_rate_hz)?;
    signal.normalize_power(1.0);
    Ok(OfdmFrame {
        signal,
        grid,
        params,
    })
}

pub fn gen_lte(cfg: &WaveformConfig, ctx: SeedContext) -> Result<IqBuffer> {
    lte_frame(cfg, ctx).map(|f| f.signal)
}

pub fn gen_nr(cfg: &WaveformConfig, ctx: SeedContext) -> Result<IqBuffer> {
    nr_frame(cfg, ctx).map(|f| f.signal)
}

/// RMS error vector magnitude after a least-squares complex gain fit.
pub fn evm(received: &[Vec<Complex64>], sent: &[Vec<Complex64>]) -> f64 {
    let pairs = || received.iter().flatten().zip(sent.iter().flatten());
    let num: Complex64 = pairs().map(|(r, s)| r * s.conj()).sum();
    let den: f64 = pairs().map(|(_, s)| s.norm_sqr()).sum();
    let gain = num / den;
    let err: f64 = pairs().map(|(r, s)| (r - s * gain).norm_sqr()).sum();
    let ref_power: f64 = pairs().map(|(_, s)| (s * gain).norm_sqr()).sum();
    (err / ref_power).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::fft::{bin_frequency, fft};
    use crate::dsp::spectral::welch;
    use crate::rng::StreamTag;

    fn ctx(i: u64) -> SeedContext {
        SeedContext::new(42, i, StreamTag::Bits)
    }

    fn peak_frequency(x: &[Complex64], rate: f64) -> f64 {
        let spec = fft(x);
        let (k, _) = spec
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        bin_frequency(k, x.len(), rate)
    }

    #[test]
    fn lte_cp_lengths_per_slot() {
        let p = OfdmParams::lte_native(600);
        let cps: Vec<usize> = (0..7).map(|l| p.cp_len(l)).collect();
        assert_eq!(cps, vec![80, 72, 72, 72, 72, 72, 72]);
        // 0.5 ms slot at 15.36 MHz
        assert_eq!(p.period_samples(), 7680);
        assert_eq!(OfdmParams::nr(792).period_samples(), 15360);
    }

    #[test]
    fn single_subcarrier_maps_to_expected_tone() {
        for (params, k, expected) in [
            (OfdmParams::lte_native(600), 30i64, 450e3),
            (OfdmParams::nr(792), 100i64, 3.0e6),
        ] {
            let idx = params.subcarriers().iter().position(|&s| s == k).unwrap();
            let mut row = vec![Complex64::new(0.0, 0.0); params.occupied];
            row[idx] = Complex64::new(1.0, 0.0);
            let x = ofdm_modulate(&params, &[row]);
            let body = &x[params.cp_len(0)..];
            let f = peak_frequency(body, params.sample_rate_hz);
            assert!((f - expected).abs() < 1e-6, "got {f}");
        }
    }

    #[test]
    fn subcarrier_layout_nulls_dc() {
        let p = OfdmParams::lte_native(600);
        let sc = p.subcarriers();
        assert_eq!(sc.len(), 600);
        assert!(!sc.contains(&0));
        assert_eq!((sc[0], sc[599]), (-300, 300));
    }

    #[test]
    fn occupancy_limits() {
        let mut lte = WaveformConfig::new(StandardId::Lte);
        lte.occupied_subcarriers = 602;
        assert!(gen_lte(&lte, ctx(0)).is_err());
        let mut nr = WaveformConfig::new(StandardId::Nr);
        nr.occupied_subcarriers = 962;
        assert!(gen_nr(&nr, ctx(0)).is_err());
        nr.occupied_subcarriers = 792;
        nr.numerology_mu = 0;
        assert!(gen_nr(&nr, ctx(0)).is_err());
    }

    #[test]
    fn loopback_evm_below_one_percent() {
        for standard in [StandardId::Lte, StandardId::Nr] {
            for qam in QamOrder::ALL {
                let mut cfg = WaveformConfig::new(standard);
                cfg.qam_order = qam;
                let frame = match standard {
                    StandardId::Lte => lte_frame(&cfg, ctx(3)).unwrap(),
                    _ => nr_frame(&cfg, ctx(3)).unwrap(),
                };
                let n = frame.params.symbols_for(frame.signal.len()) - 1;
                let rx = ofdm_demodulate(&frame.params, &frame.signal.samples, n);
                let e = evm(&rx, &frame.grid[..rx.len()]);
                assert!(e <= 0.01, "{standard} {qam:?} evm {e}");
            }
        }
    }

    #[test]
    fn bandwidths_and_power() {
        let lte = gen_lte(&WaveformConfig::new(StandardId::Lte), ctx(1)).unwrap();
        let nr = gen_nr(&WaveformConfig::new(StandardId::Nr), ctx(1)).unwrap();
        for x in [&lte, &nr] {
            assert_eq!(x.len(), crate::SAMPLE_LEN);
            assert!((x.power() - 1.0).abs() <= 1e-6);
        }
        let bw_lte = welch(&lte.samples, lte.sample_rate_hz, 4096, 2048).occupied_bandwidth(0.99);
        let bw_nr = welch(&nr.samples, nr.sample_rate_hz, 4096, 2048).occupied_bandwidth(0.99);
        assert!((8.1e6..=9.9e6).contains(&bw_lte), "lte {bw_lte}");
        assert!((bw_nr - 23.8e6).abs() <= 0.1 * 23.8e6, "nr {bw_nr}");
    }
}
