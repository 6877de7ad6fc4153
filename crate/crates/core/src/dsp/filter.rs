//! Pulse-shaping filter design.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// GMSK frequency pulse: a rectangle of one symbol convolved with a
    /// Gaussian of the given bandwidth-time product.
    GaussianGmsk,
    RootRaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// BT product for the Gaussian pulse, roll-off for RRC.
    pub bt_or_rolloff: f64,
    pub span_symbols: usize,
    pub samples_per_symbol: usize,
}

impl FilterSpec {
    pub fn gmsk(bt: f64, samples_per_symbol: usize) -> Self {
        Self {
            kind: FilterKind::GaussianGmsk,
            bt_or_rolloff: bt,
            span_symbols: 3,
            samples_per_symbol,
        }
    }

    pub fn rrc(rolloff: f64, samples_per_symbol: usize) -> Self {
        Self {
            kind: FilterKind::RootRaisedCosine,
            bt_or_rolloff: rolloff,
            span_symbols: 12,
            samples_per_symbol,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.span_symbols == 0 || self.samples_per_symbol == 0 {
            return param("filter span and samples per symbol must be positive");
        }
        let v = self.bt_or_rolloff;
        match self.kind {
            FilterKind::GaussianGmsk if !(v > 0.0 && v <= 1.0) => {
                param(format!("BT product must lie in (0, 1], got {v}"))
            }
            FilterKind::RootRaisedCosine if !(0.0..=1.0).contains(&v) => {
                param(format!("roll-off must lie in [0, 1], got {v}"))
            }
            _ => Ok(()),
        }
    }
}

fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Continuous GMSK frequency pulse at time `t` (in symbol periods) with unit area.
pub fn gaussian_frequency_pulse(t: f64, bt: f64) -> f64 {
    let c = 2.0 * PI * bt / (2.0f64.ln()).sqrt();
    q_function(c * (t - 0.5)) - q_function(c * (t + 0.5))
}

fn rrc_tap(t: f64, alpha: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - alpha + 4.0 * alpha / PI;
    }
    if alpha > 0.0 && (t.abs() - 1.0 / (4.0 * alpha)).abs() < 1e-9 {
        let a = PI / (4.0 * alpha);
        return alpha / SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - alpha)).sin() + 4.0 * alpha * t * (PI * t * (1.0 + alpha)).cos();
    let den = PI * t * (1.0 - (4.0 * alpha * t).powi(2));
    num / den
}

/// Designs a symmetric tap vector of length `span * sps + 1`.
///
/// Gaussian taps sum to one, so that integrating the pulse of an isolated
/// symbol times `pi * h` yields exactly `pi * h` of phase. RRC taps have unit
/// energy.
pub fn design_filter(spec: &FilterSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let sps = spec.samples_per_symbol as f64;
    let len = spec.span_symbols * spec.samples_per_symbol + 1;
    let mid = (len - 1) as f64 / 2.0;
    let times = (0..len).map(|n| (n as f64 - mid) / sps);
    match spec.kind {
        FilterKind::GaussianGmsk => {
            let taps: Vec<f64> = times
                .map(|t| gaussian_frequency_pulse(t, spec.bt_or_rolloff))
                .collect();
            let sum: f64 = taps.iter().sum();
            Ok(taps.into_iter().map(|h| h / sum).collect())
        }
        FilterKind::RootRaisedCosine => {
            let taps: Vec<f64> = times.map(|t| rrc_tap(t, spec.bt_or_rolloff)).collect();
            let energy: f64 = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
            Ok(taps.into_iter().map(|h| h / energy).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrc_zero_rolloff_is_sinc() {
        let spec = FilterSpec::rrc(0.0, 4);
        let taps = design_filter(&spec).unwrap();
        let mid = taps.len() / 2;
        let peak = taps[mid];
        for (n, &h) in taps.iter().enumerate() {
            let t = (n as f64 - mid as f64) / 4.0;
            let sinc = if t == 0.0 { 1.0 } else { (PI * t).sin() / (PI * t) };
            assert!((h / peak - sinc).abs() < 1e-12, "tap {n}");
        }
    }

    #[test]
    fn rrc_has_unit_energy() {
        let taps = design_filter(&FilterSpec::rrc(0.22, 8)).unwrap();
        let e: f64 = taps.iter().map(|h| h * h).sum();
        assert!((e - 1.0).abs() <= 1e-9);
        assert_eq!(taps.len(), 12 * 8 + 1);
    }

    #[test]
    fn rrc_singular_points_are_finite_and_continuous() {
        // alpha = 0.25 puts t = +-1 exactly on a tap
        let taps = design_filter(&FilterSpec::rrc(0.25, 4)).unwrap();
        assert!(taps.iter().all(|h| h.is_finite()));
        let mid = taps.len() / 2;
        let near = rrc_tap(1.0 + 1e-6, 0.25);
        let at = rrc_tap(1.0, 0.25);
        assert!((near - at).abs() < 1e-5);
        assert!(taps[mid + 4].is_finite());
    }

    #[test]
    fn filters_are_symmetric() {
        for spec in [FilterSpec::rrc(0.22, 8), FilterSpec::gmsk(0.3, 16)] {
            let t = design_filter(&spec).unwrap();
            for i in 0..t.len() {
                assert!((t[i] - t[t.len() - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gaussian_taps_sum_to_one_and_match_continuous_integral() {
        let taps = design_filter(&FilterSpec::gmsk(0.3, 16)).unwrap();
        assert!((taps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // the pulse integrates to one over all time; three symbols keep
        // essentially all of it
        let n = 200_000;
        let dt = 20.0 / n as f64;
        let total: f64 = (0..n)
            .map(|i| gaussian_frequency_pulse(-10.0 + (i as f64 + 0.5) * dt, 0.3) * dt)
            .sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn out_of_range_specs_are_rejected() {
        assert!(design_filter(&FilterSpec::gmsk(0.0, 8)).is_err());
        assert!(design_filter(&FilterSpec::gmsk(1.5, 8)).is_err());
        assert!(design_filter(&FilterSpec::rrc(-0.1, 8)).is_err());
        assert!(design_filter(&FilterSpec::rrc(1.1, 8)).is_err());
        let mut s = FilterSpec::rrc(0.22, 8);
        s.span_symbols = 0;
        assert!(design_filter(&s).is_err());
    }
}
