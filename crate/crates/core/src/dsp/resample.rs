//! Polyphase rational resampling.

use num_complex::Complex64;

use super::window::{kaiser, kaiser_beta};
use crate::error::{param, Result};
use crate::iq::IqBuffer;

const MAX_FACTOR: usize = 64;
const STOPBAND_DB: f64 = 80.0;
/// Passband edge as a fraction of the lower Nyquist frequency.
const PASSBAND_FRACTION: f64 = 0.8;

/// Smallest `(up, down)` with both terms at most `max` whose quotient
/// matches `ratio` to 1e-9 relative error.
pub fn rational_ratio(ratio: f64, max: usize) -> Option<(usize, usize)> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return None;
    }
    for down in 1..=max {
        let up = (ratio * down as f64).round();
        if up < 1.0 || up > max as f64 {
            continue;
        }
        if (up / down as f64 - ratio).abs() <= 1e-9 * ratio {
            return Some((up as usize, down));
        }
    }
    None
}

/// Upsample by `up`, low-pass, downsample by `down`, evaluated per output
/// phase without materializing the zero-stuffed signal.
#[derive(Debug, Clone)]
pub struct Resampler {
    up: usize,
    down: usize,
    taps: Vec<f64>,
}

impl Resampler {
    pub fn new(up: usize, down: usize) -> Self {
        // all frequencies normalized to the upsampled rate
        let f_stop = 0.5 / up.max(down) as f64;
        let f_pass = PASSBAND_FRACTION * f_stop;
        let cutoff = 0.5 * (f_pass + f_stop);
        let transition = 2.0 * std::f64::consts::PI * (f_stop - f_pass);
        let mut len = ((STOPBAND_DB - 8.0) / (2.285 * transition)).ceil() as usize + 1;
        if len % 2 == 0 {
            len += 1;
        }
        let window = kaiser(len, kaiser_beta(STOPBAND_DB));
        let mid = (len - 1) as f64 / 2.0;
        let taps = window
            .iter()
            .enumerate()
            .map(|(n, w)| {
                let t = n as f64 - mid;
                let ideal = if t == 0.0 {
                    2.0 * cutoff
                } else {
                    (2.0 * std::f64::consts::PI * cutoff * t).sin() / (std::f64::consts::PI * t)
                };
                ideal * w * up as f64
            })
            .collect();
        Self { up, down, taps }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        (input_len * self.up).div_ceil(self.down)
    }

    pub fn process(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (p, q) = (self.up, self.down);
        let delay = (self.taps.len() - 1) / 2;
        let n = x.len();
        (0..self.output_len(n))
            .map(|m| {
                let u = m * q + delay;
                let mut acc = Complex64::new(0.0, 0.0);
                let mut k = u % p;
                while k < self.taps.len() && k <= u {
                    let idx = (u - k) / p;
                    if idx < n {
                        acc += x[idx] * self.taps[k];
                    }
                    k += p;
                }
                acc
            })
            .collect()
    }
}

/// Resamples to `target_rate_hz`. The ratio must reduce to `up/down` with
/// both terms at most 64; equal rates return an exact copy.
pub fn resample(x: &IqBuffer, target_rate_hz: f64) -> Result<IqBuffer> {
    let ratio = target_rate_hz / x.sample_rate_hz;
    let Some((up, down)) = rational_ratio(ratio, MAX_FACTOR) else {
        return param(format!(
            "resampling ratio {target_rate_hz}/{} is not a rational with terms <= {MAX_FACTOR}",
            x.sample_rate_hz
        ));
    };
    if up == down {
        return Ok(IqBuffer {
            samples: x.samples.clone(),
            sample_rate_hz: target_rate_hz,
        });
    }
    let r = Resampler::new(up, down);
    Ok(IqBuffer {
        samples: r.process(&x.samples),
        sample_rate_hz: target_rate_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::fft::{fft, ifft};
    use crate::rng::{SeedContext, StreamTag};
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn tone(f: f64, rate: f64, n: usize) -> IqBuffer {
        let s = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * f * i as f64 / rate))
            .collect();
        IqBuffer::new(s, rate).unwrap()
    }

    #[test]
    fn ratio_detection() {
        assert_eq!(rational_ratio(2.0, 64), Some((2, 1)));
        assert_eq!(rational_ratio(0.5, 64), Some((1, 2)));
        assert_eq!(rational_ratio(48.0 / 25.0, 64), Some((48, 25)));
        assert_eq!(rational_ratio(16e6 / (13e6 / 3.0), 64), Some((48, 13)));
        assert_eq!(rational_ratio(std::f64::consts::E, 64), None);
        assert_eq!(rational_ratio(65.0, 64), None);
    }

    #[test]
    fn identity_ratio_is_bitwise_copy() {
        let x = tone(1.3e6, 30.72e6, 1000);
        let y = resample(&x, 30.72e6).unwrap();
        assert_eq!(x.samples, y.samples);
    }

    #[test]
    fn oversized_ratio_is_rejected() {
        let x = tone(1e6, 1e6 * 3.0, 64);
        assert!(resample(&x, 1e6 * 3.0 * 65.0).is_err());
        assert!(resample(&x, 1e6 * std::f64::consts::PI).is_err());
    }

    #[test]
    fn tone_survives_upsampling() {
        let n = 8192;
        let x = tone(1e6, 15.36e6, n);
        let y = resample(&x, 30.72e6).unwrap();
        assert_eq!(y.len(), 2 * n);
        // steady-state interior, away from the zero-padded edges
        let interior = &y.samples[2048..2 * n - 2048];
        let p = interior.iter().map(|c| c.norm_sqr()).sum::<f64>() / interior.len() as f64;
        assert!((10.0 * p.log10()).abs() <= 0.1, "power change {p}");
        let spec = fft(&interior[..8192]);
        let (kmax, _) = spec
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        let f = crate::dsp::fft::bin_frequency(kmax, 8192, 30.72e6);
        assert!((f - 1e6).abs() <= 30.72e6 / 8192.0);
    }

    #[test]
    fn passband_ripple_within_tenth_db() {
        let r = Resampler::new(2, 1);
        // response over the passband 0 .. 0.8 * 7.68 MHz at 30.72 MHz
        for i in 0..50 {
            let f = 0.8 * 0.25 * i as f64 / 49.0;
            let h: Complex64 = r
                .taps()
                .iter()
                .enumerate()
                .map(|(n, &t)| Complex64::from_polar(t / 2.0, -2.0 * PI * f * n as f64))
                .sum();
            assert!((20.0 * h.norm().log10()).abs() <= 0.1, "f={f}");
        }
    }

    #[test]
    fn decimation_rejects_out_of_band_noise() {
        // white noise confined to |f| > 15.36 MHz at 61.44 MHz
        let n = 1 << 16;
        let mut rng = SeedContext::new(3, 0, StreamTag::Noise).stream();
        let white: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let mut spec = fft(&white);
        for (k, v) in spec.iter_mut().enumerate() {
            let f = crate::dsp::fft::bin_frequency(k, n, 61.44e6);
            if f.abs() <= 15.36e6 {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        let oob = IqBuffer::new(ifft(&spec), 61.44e6).unwrap();
        let y = resample(&oob, 30.72e6).unwrap();
        let interior = &y.samples[1024..y.len() - 1024];
        let p_out = interior.iter().map(|c| c.norm_sqr()).sum::<f64>() / interior.len() as f64;
        let atten = 10.0 * (oob.power() / p_out).log10();
        assert!(atten >= 60.0, "attenuation {atten} dB");
    }
}
