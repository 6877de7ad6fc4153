use num_complex::Complex64;

/// Full linear convolution of a complex signal with real taps.
pub fn convolve(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    if x.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + taps.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        for (k, &h) in taps.iter().enumerate() {
            y[i + k] += xi * h;
        }
    }
    y
}

/// FIR filter whose output is aligned with the input by removing the
/// `(taps.len() - 1) / 2` sample group delay of a symmetric filter.
/// Output length equals input length; samples outside `x` are zero.
pub fn filter_centered(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let delay = (taps.len().saturating_sub(1)) / 2;
    let n = x.len() as isize;
    (0..x.len())
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &h) in taps.iter().enumerate() {
                let idx = m as isize + delay as isize - k as isize;
                if idx >= 0 && idx < n {
                    acc += x[idx as usize] * h;
                }
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn to_complex(v: &[(f64, f64)]) -> Vec<Complex64> {
        v.iter().map(|&(r, i)| Complex64::new(r, i)).collect()
    }

    #[test]
    fn impulse_returns_taps() {
        let x = vec![Complex64::new(1.0, 0.0)];
        let y = convolve(&x, &[0.5, 0.25, 0.125]);
        assert_eq!(y.iter().map(|c| c.re).collect::<Vec<_>>(), vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn centered_filter_keeps_alignment() {
        let mut x = vec![Complex64::new(0.0, 0.0); 9];
        x[4] = Complex64::new(1.0, 0.0);
        let y = filter_centered(&x, &[0.25, 0.5, 0.25]);
        assert_eq!(y[4].re, 0.5);
        assert_eq!(y[3].re, 0.25);
        assert_eq!(y[5].re, 0.25);
    }

    proptest! {
        #[test]
        fn filtering_is_linear(
            xs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
            ys in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
            taps in prop::collection::vec(-1.0f64..1.0, 1..16),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let x = to_complex(&xs);
            let y = to_complex(&ys);
            let combo: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| p * a + q * b).collect();
            let lhs = filter_centered(&combo, &taps);
            let fx = filter_centered(&x, &taps);
            let fy = filter_centered(&y, &taps);
            let rhs: Vec<Complex64> = fx.iter().zip(&fy).map(|(p, q)| p * a + q * b).collect();
            let err: f64 = lhs.iter().zip(&rhs).map(|(p, q)| (p - q).norm_sqr()).sum();
            let norm: f64 = rhs.iter().map(|p| p.norm_sqr()).sum::<f64>().max(1e-30);
            prop_assert!((err / norm).sqrt() <= 1e-9);
        }
    }
}
