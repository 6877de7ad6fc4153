use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let (planner, cache) = &mut *p;
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Unnormalized forward DFT.
pub fn fft_in_place(x: &mut [Complex64]) {
    if x.is_empty() {
        return;
    }
    plan(x.len(), false).process(x);
}

/// Inverse DFT scaled by 1/N, so `ifft(fft(x)) == x`.
pub fn ifft_in_place(x: &mut [Complex64]) {
    if x.is_empty() {
        return;
    }
    plan(x.len(), true).process(x);
    let scale = 1.0 / x.len() as f64;
    for v in x.iter_mut() {
        *v *= scale;
    }
}

pub fn fft(x: &[Complex64]) -> Vec<Complex64> {
    let mut y = x.to_vec();
    fft_in_place(&mut y);
    y
}

pub fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    let mut y = x.to_vec();
    ifft_in_place(&mut y);
    y
}

/// Frequency in Hz of DFT bin `k` for an `n`-point transform, mapped to
/// `[-rate/2, rate/2)`.
pub fn bin_frequency(k: usize, n: usize, rate_hz: f64) -> f64 {
    let k = k as f64;
    let n_f = n as f64;
    if k < n_f / 2.0 {
        k * rate_hz / n_f
    } else {
        (k - n_f) * rate_hz / n_f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedContext, StreamTag};
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn round_trip_2048_random() {
        let mut rng = SeedContext::new(7, 0, StreamTag::Noise).stream();
        let x: Vec<Complex64> = (0..2048)
            .map(|_| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let y = ifft(&fft(&x));
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum();
        let norm: f64 = x.iter().map(|a| a.norm_sqr()).sum();
        assert!((err / norm).sqrt() <= 1e-6);
    }

    #[test]
    fn bin_frequency_wraps_negative_half() {
        assert_eq!(bin_frequency(1, 8, 8.0), 1.0);
        assert_eq!(bin_frequency(4, 8, 8.0), -4.0);
        assert_eq!(bin_frequency(7, 8, 8.0), -1.0);
    }
}
