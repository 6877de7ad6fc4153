//! Time-delay embedding of one complex channel into real feature rows.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rfss_core::IqBuffer;

use crate::{BaselineError, Result};

pub const HANKEL_WINDOW: usize = 256;
pub const HANKEL_HOP: usize = 128;

/// `rows[f]` holds samples `f*hop .. f*hop + window` as interleaved
/// `(re, im)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelFrames {
    pub rows: DMatrix<f64>,
    pub window: usize,
    pub hop: usize,
    pub signal_len: usize,
}

pub fn num_frames(len: usize, window: usize, hop: usize) -> usize {
    (len - window) / hop + 1
}

pub fn hankel_embed(x: &IqBuffer) -> Result<HankelFrames> {
    hankel_embed_with(&x.samples, HANKEL_WINDOW, HANKEL_HOP)
}

pub fn hankel_embed_with(x: &[Complex64], window: usize, hop: usize) -> Result<HankelFrames> {
    if x.len() < window {
        return Err(BaselineError::Parameter(format!(
            "Hankel embedding needs at least {window} samples, got {}",
            x.len()
        )));
    }
    let frames = num_frames(x.len(), window, hop);
    let rows = DMatrix::from_fn(frames, 2 * window, |f, d| {
        let s = x[f * hop + d / 2];
        if d % 2 == 0 {
            s.re
        } else {
            s.im
        }
    });
    Ok(HankelFrames {
        rows,
        window,
        hop,
        signal_len: x.len(),
    })
}

/// De-interleaves `rows` back into complex windows and overlap-adds them,
/// dividing each sample by the number of frames covering it.
pub fn overlap_average(
    rows: &DMatrix<f64>,
    window: usize,
    hop: usize,
    signal_len: usize,
) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); signal_len];
    let mut count = vec![0u32; signal_len];
    for f in 0..rows.nrows() {
        for t in 0..window {
            let n = f * hop + t;
            acc[n] += Complex64::new(rows[(f, 2 * t)], rows[(f, 2 * t + 1)]);
            count[n] += 1;
        }
    }
    acc.iter()
        .zip(&count)
        .map(|(a, &c)| if c > 0 { a / c as f64 } else { *a })
        .collect()
}
