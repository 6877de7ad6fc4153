//! Hankel-embedding FastICA with a log-cosh contrast and symmetric
//! decorrelation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rfss_core::{IqBuffer, SeedContext};

use crate::hankel::{hankel_embed, overlap_average};
use crate::{check_sources, Result};

pub const ICA_TOL: f64 = 1e-4;
pub const ICA_MAX_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct IcaOutput {
    pub estimates: Vec<IqBuffer>,
    /// Unmixing matrix in the whitened space (orthonormal rows).
    pub unmixing: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// `(W W^T)^(-1/2) W`.
pub fn symmetric_decorrelation(w: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(w * w.transpose());
    let inv_sqrt = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| 1.0 / l.max(1e-300).sqrt()),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose() * w
}

/// Fixed-point FastICA on whitened data `z` (`[observations x k]`).
/// Returns the unmixing matrix, whether it converged and the iteration count.
pub fn fastica_whitened(
    z: &DMatrix<f64>,
    w0: DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> (DMatrix<f64>, bool, usize) {
    let n = z.nrows() as f64;
    let mut w = symmetric_decorrelation(&w0);
    for it in 1..=max_iter {
        // projections: [observations x k]
        let y = z * w.transpose();
        let g = y.map(f64::tanh);
        let g_prime_mean = DVector::from_iterator(
            w.nrows(),
            (0..w.nrows()).map(|c| g.column(c).iter().map(|v| 1.0 - v * v).sum::<f64>() / n),
        );
        let update = g.transpose() * z / n - DMatrix::from_diagonal(&g_prime_mean) * &w;
        let next = symmetric_decorrelation(&update);
        let change = (&next * w.transpose())
            .diagonal()
            .iter()
            .map(|d| (d.abs() - 1.0).abs())
            .fold(0.0, f64::max);
        w = next;
        if change < tol {
            return (w, true, it);
        }
    }
    (w, false, max_iter)
}

/// Separates `num_sources` components from the Hankel embedding of `x`
/// and maps each back to a waveform by rank-one back-projection followed
/// by overlap-averaging. One source returns the input unchanged.
pub fn fastica_separate(x: &IqBuffer, num_sources: usize, ctx: SeedContext) -> Result<IcaOutput> {
    check_sources(num_sources)?;
    if num_sources == 1 {
        return Ok(IcaOutput {
            estimates: vec![x.clone()],
            unmixing: DMatrix::identity(1, 1),
            converged: true,
            iterations: 0,
        });
    }
    let h = hankel_embed(x)?;
    let frames = h.rows.nrows();
    let k = num_sources.min(frames).min(h.rows.ncols());
    let mean = h.rows.row_mean();
    let mut centered = h.rows.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / frames as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let top = &order[..k];
    let basis = DMatrix::from_fn(centered.ncols(), k, |r, c| eig.eigenvectors[(r, top[c])]);
    let scale: Vec<f64> = top
        .iter()
        .map(|&i| eig.eigenvalues[i].max(1e-300).sqrt())
        .collect();
    let mut z = &centered * &basis;
    for (c, s) in scale.iter().enumerate() {
        z.column_mut(c).scale_mut(1.0 / s);
    }

    let mut rng = ctx.stream();
    let w0 = DMatrix::from_fn(k, k, |_, _| StandardNormal.sample(&mut rng));
    let (w, converged, iterations) = fastica_whitened(&z, w0, ICA_TOL, ICA_MAX_ITER);

    let sources = &z * w.transpose();
    // row i of W * diag(scale) * basis^T is the mixing pattern of source i
    let mut scaled_basis_t = basis.transpose();
    for (r, s) in scale.iter().enumerate() {
        scaled_basis_t.row_mut(r).scale_mut(*s);
    }
    let mixing = &w * scaled_basis_t;
    let estimates = (0..k)
        .map(|i| {
            let component = sources.column(i) * mixing.row(i);
            x.with_samples(overlap_average(&component, h.window, h.hop, h.signal_len))
        })
        .collect();
    Ok(IcaOutput {
        estimates,
        unmixing: w,
        converged,
        iterations,
    })
}
