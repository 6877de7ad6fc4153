//! Magnitude-spectrogram NMF (Frobenius cost, multiplicative updates) with
//! Wiener-ratio masks applied to the complex mixture STFT.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rand::Rng;
use rfss_core::{IqBuffer, SeedContext};

use crate::stft::{istft, stft, StftGrid, STFT_HOP, STFT_NFFT};
use crate::{check_sources, Result};

pub const NMF_ITERATIONS: usize = 500;
pub const MASK_EPS: f64 = 1e-12;
const DENOM_EPS: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct NmfOutput {
    pub estimates: Vec<IqBuffer>,
    /// `[bins x k]`
    pub w: Array2<f64>,
    /// `[k x frames]`
    pub h: Array2<f64>,
    /// Frobenius cost `||V - WH||^2` after initialization and after each
    /// iteration.
    pub objective: Vec<f64>,
}

pub fn frobenius_cost(v: &Array2<f64>, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let wh = w.dot(h);
    v.iter()
        .zip(wh.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Lee-Seung multiplicative updates from a random non-negative start
/// scaled to the data.
pub fn nmf(
    v: &Array2<f64>,
    k: usize,
    iterations: usize,
    ctx: SeedContext,
) -> (Array2<f64>, Array2<f64>, Vec<f64>) {
    let (bins, frames) = v.dim();
    let mut rng = ctx.stream();
    let scale = (v.mean().unwrap_or(0.0) / k as f64).sqrt();
    let w = Array2::from_shape_fn((bins, k), |_| rng.gen::<f64>() * scale);
    let h = Array2::from_shape_fn((k, frames), |_| rng.gen::<f64>() * scale);
    nmf_from(v, w, h, iterations)
}

/// Multiplicative updates from a given non-negative start.
pub fn nmf_from(
    v: &Array2<f64>,
    mut w: Array2<f64>,
    mut h: Array2<f64>,
    iterations: usize,
) -> (Array2<f64>, Array2<f64>, Vec<f64>) {
    let mut objective = Vec::with_capacity(iterations + 1);
    objective.push(frobenius_cost(v, &w, &h));
    for _ in 0..iterations {
        let num_h = w.t().dot(v);
        let den_h = w.t().dot(&w).dot(&h);
        h.zip_mut_with(&num_h, |x, n| *x *= n);
        h.zip_mut_with(&den_h, |x, d| *x /= d + DENOM_EPS);

        let num_w = v.dot(&h.t());
        let den_w = w.dot(&h.dot(&h.t()));
        w.zip_mut_with(&num_w, |x, n| *x *= n);
        w.zip_mut_with(&den_w, |x, d| *x /= d + DENOM_EPS);
        objective.push(frobenius_cost(v, &w, &h));
    }
    (w, h, objective)
}

fn magnitude(grid: &StftGrid) -> Array2<f64> {
    Array2::from_shape_fn((grid.num_bins(), grid.num_frames()), |(b, f)| {
        grid.frames[f][b].norm()
    })
}

/// `mask_i = w_i h_i / (sum_k w_k h_k + eps)` for every component.
pub fn wiener_masks(w: &Array2<f64>, h: &Array2<f64>) -> Vec<Array2<f64>> {
    let k = w.ncols();
    let parts: Vec<Array2<f64>> = (0..k)
        .map(|i| {
            let wi = w.column(i).insert_axis(Axis(1)).to_owned();
            let hi = h.row(i).insert_axis(Axis(0)).to_owned();
            wi.dot(&hi)
        })
        .collect();
    let total = w.dot(h);
    parts
        .into_iter()
        .map(|mut p| {
            p.zip_mut_with(&total, |x, t| *x /= t + MASK_EPS);
            p
        })
        .collect()
}

pub fn nmf_separate(x: &IqBuffer, num_sources: usize, ctx: SeedContext) -> Result<NmfOutput> {
    check_sources(num_sources)?;
    let grid = stft(&x.samples, STFT_NFFT, STFT_HOP);
    let v = magnitude(&grid);
    let (w, h, objective) = nmf(&v, num_sources, NMF_ITERATIONS, ctx);
    let estimates = wiener_masks(&w, &h)
        .iter()
        .map(|m| {
            let frames: Vec<Vec<Complex64>> = grid
                .frames
                .iter()
                .enumerate()
                .map(|(f, row)| row.iter().enumerate().map(|(b, c)| c * m[(b, f)]).collect())
                .collect();
            x.with_samples(istft(&grid.with_frames(frames)))
        })
        .collect();
    Ok(NmfOutput {
        estimates,
        w,
        h,
        objective,
    })
}
