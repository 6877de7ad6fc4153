//! Spectral estimators shared by tests, characterization and baselines.

use num_complex::Complex64;

use super::fft::fft_in_place;
use super::window::hann_periodic;

/// Two-sided power spectral density with frequencies in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs_hz: Vec<f64>,
    /// Power per Hz.
    pub density: Vec<f64>,
    pub bin_hz: f64,
}

impl Psd {
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_hz
    }

    /// Power-weighted mean frequency.
    pub fn centroid_hz(&self) -> f64 {
        let total: f64 = self.density.iter().sum();
        self.freqs_hz
            .iter()
            .zip(&self.density)
            .map(|(f, p)| f * p)
            .sum::<f64>()
            / total
    }

    /// Width of the band holding `fraction` of the power, with
    /// `(1 - fraction) / 2` excluded on each side. Edges are interpolated
    /// linearly inside the bin where the cumulative power crosses them.
    pub fn occupied_bandwidth(&self, fraction: f64) -> f64 {
        let total: f64 = self.density.iter().sum();
        let tail = 0.5 * (1.0 - fraction) * total;
        let lower = crossing(&self.density, tail);
        let upper = crossing(&self.density, total - tail);
        (upper - lower) * self.bin_hz
    }
}

/// Fractional bin position (bin edges at integers) where the running sum
/// reaches `level`.
fn crossing(density: &[f64], level: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &p) in density.iter().enumerate() {
        if acc + p >= level {
            let frac = if p > 0.0 { (level - acc) / p } else { 0.0 };
            return i as f64 + frac;
        }
        acc += p;
    }
    density.len() as f64
}

/// Welch estimate with a periodic Hann window and the given overlap.
/// Short inputs are zero-padded to a single segment.
pub fn welch(x: &[Complex64], rate_hz: f64, nfft: usize, overlap: usize) -> Psd {
    let window = hann_periodic(nfft);
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let hop = nfft - overlap;
    let mut acc = vec![0.0; nfft];
    let mut segments = 0usize;
    let mut start = 0;
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    loop {
        for (i, b) in buf.iter_mut().enumerate() {
            let v = x.get(start + i).copied().unwrap_or_default();
            *b = v * window[i];
        }
        fft_in_place(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
        if start + nfft > x.len() {
            break;
        }
    }
    let scale = 1.0 / (segments as f64 * win_energy * rate_hz);
    // reorder to ascending frequency
    let half = nfft / 2;
    let mut freqs = Vec::with_capacity(nfft);
    let mut density = Vec::with_capacity(nfft);
    for j in 0..nfft {
        let k = (j + half) % nfft;
        freqs.push((j as f64 - half as f64) * rate_hz / nfft as f64);
        density.push(acc[k] * scale);
    }
    Psd {
        freqs_hz: freqs,
        density,
        bin_hz: rate_hz / nfft as f64,
    }
}

/// Short-time spectra: one row per frame, `nfft` bins in DFT order.
/// Frames start at multiples of `hop` and must fit entirely in `x`.
pub fn stft_frames(x: &[Complex64], nfft: usize, hop: usize, window: &[f64]) -> Vec<Vec<Complex64>> {
    if x.len() < nfft {
        return Vec::new();
    }
    let frames = (x.len() - nfft) / hop + 1;
    (0..frames)
        .map(|f| {
            let mut buf: Vec<Complex64> = x[f * hop..f * hop + nfft]
                .iter()
                .zip(window)
                .map(|(v, w)| v * w)
                .collect();
            fft_in_place(&mut buf);
            buf
        })
        .collect()
}

/// Peak-to-average power ratio in dB.
pub fn papr_db(x: &[Complex64]) -> f64 {
    let peak = x.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
    let mean = crate::iq::mean_power(x);
    10.0 * (peak / mean).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn welch_preserves_total_power() {
        let x: Vec<Complex64> = (0..20000)
            .map(|n| Complex64::from_polar(2.0, 2.0 * PI * 0.1 * n as f64))
            .collect();
        let psd = welch(&x, 1e6, 1024, 512);
        assert!((psd.total_power() - 4.0).abs() / 4.0 < 1e-2);
        assert!((psd.centroid_hz() - 1e5).abs() < 1e3);
    }

    #[test]
    fn occupied_bandwidth_of_flat_spectrum() {
        let psd = Psd {
            freqs_hz: (0..100).map(|i| i as f64).collect(),
            density: vec![1.0; 100],
            bin_hz: 1.0,
        };
        assert!((psd.occupied_bandwidth(0.99) - 99.0).abs() < 1e-9);
    }

    #[test]
    fn tone_papr_is_zero() {
        let x: Vec<Complex64> = (0..4096)
            .map(|n| Complex64::from_polar(1.0, 0.37 * n as f64))
            .collect();
        assert!(papr_db(&x).abs() < 1e-9);
    }
}
