use num_complex::Complex64;

use crate::error::{param, Result};

/// Contiguous complex baseband samples at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl IqBuffer {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return param(format!("sample rate must be positive, got {sample_rate_hz}"));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return param("buffer contains non-finite samples");
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of |x|^2; zero for an empty buffer.
    pub fn power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn scale(&mut self, gain: f64) {
        for s in &mut self.samples {
            *s *= gain;
        }
    }

    /// Rescales to the given average power. Silent buffers are left untouched.
    pub fn normalize_power(&mut self, target: f64) {
        let p = self.power();
        if p > 0.0 {
            self.scale((target / p).sqrt());
        }
    }

    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|s| s.norm_sqr()).sum::<f64>() / x.len() as f64
}
