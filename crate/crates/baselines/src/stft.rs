//! STFT/ISTFT with weighted overlap-add.

use num_complex::Complex64;
use rfss_core::dsp::fft::ifft_in_place;
use rfss_core::dsp::spectral::stft_frames;
use rfss_core::dsp::window::hann_periodic;
use serde::{Deserialize, Serialize};

pub const STFT_NFFT: usize = 1024;
pub const STFT_HOP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
}

/// Short-time spectra of a signal padded by `fft_size - hop` zeros at the
/// front and enough at the back that every input sample sits in a full set
/// of overlapping frames.
#[derive(Debug, Clone, PartialEq)]
pub struct StftGrid {
    /// `[frame][bin]`, bins in DFT order.
    pub frames: Vec<Vec<Complex64>>,
    pub fft_size: usize,
    pub hop: usize,
    pub window: WindowKind,
    pub signal_len: usize,
}

impl StftGrid {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size
    }

    fn front_pad(&self) -> usize {
        self.fft_size - self.hop
    }

    pub fn with_frames(&self, frames: Vec<Vec<Complex64>>) -> Self {
        Self {
            frames,
            ..self.clone()
        }
    }
}

pub fn stft(x: &[Complex64], fft_size: usize, hop: usize) -> StftGrid {
    assert!(
        hop > 0 && hop <= fft_size && fft_size % hop == 0,
        "hop must divide the FFT size"
    );
    let front = fft_size - hop;
    let body = front + x.len() + front;
    let total = body.div_ceil(hop) * hop + fft_size - hop;
    let mut padded = vec![Complex64::new(0.0, 0.0); total.max(fft_size)];
    padded[front..front + x.len()].copy_from_slice(x);
    StftGrid {
        frames: stft_frames(&padded, fft_size, hop, &hann_periodic(fft_size)),
        fft_size,
        hop,
        window: WindowKind::Hann,
        signal_len: x.len(),
    }
}

/// Inverse by weighted overlap-add, normalized by the summed squared window.
pub fn istft(grid: &StftGrid) -> Vec<Complex64> {
    let n = grid.fft_size;
    let window = hann_periodic(n);
    let total = (grid.frames.len().saturating_sub(1)) * grid.hop + n;
    let mut acc = vec![Complex64::new(0.0, 0.0); total];
    let mut norm = vec![0.0; total];
    for (f, frame) in grid.frames.iter().enumerate() {
        let mut buf = frame.clone();
        ifft_in_place(&mut buf);
        let start = f * grid.hop;
        for i in 0..n {
            acc[start + i] += buf[i] * window[i];
            norm[start + i] += window[i] * window[i];
        }
    }
    let front = grid.front_pad();
    (front..front + grid.signal_len)
        .map(|i| {
            if norm[i] > 1e-12 {
                acc[i] / norm[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}
