//! Jakes sum-of-sinusoids fading and time-varying tap filtering.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::tdl::{TdlKind, TdlProfile};
use crate::error::{param, Result};
use crate::iq::IqBuffer;
use crate::rng::SeedContext;

pub const SINUSOIDS_PER_TAP: usize = 16;
pub const DOPPLER_RANGE_HZ: (f64, f64) = (1.0, 300.0);
pub const DELAY_SPREAD_RANGE_S: (f64, f64) = (30e-9, 300e-9);
/// Tap gains are evaluated exactly every this many samples and linearly
/// interpolated in between (phase step below 2e-3 rad at 300 Hz).
const GAIN_GRID: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LosComponent {
    pub k_factor: f64,
    pub doppler_hz: f64,
    pub phase: f64,
}

/// Unit-mean-power fading process of one tap.
#[derive(Debug, Clone, PartialEq)]
pub struct JakesProcess {
    pub scatter_doppler_hz: Vec<f64>,
    pub scatter_phases: Vec<f64>,
    pub los: Option<LosComponent>,
}

impl JakesProcess {
    /// Equally spaced arrival angles with a random common rotation and
    /// independent random phases per sinusoid.
    pub fn draw<R: Rng + ?Sized>(doppler_hz: f64, k_factor_db: Option<f64>, rng: &mut R) -> Self {
        let m = SINUSOIDS_PER_TAP as f64;
        let rotation: f64 = rng.gen_range(-PI..PI);
        let scatter_doppler_hz = (0..SINUSOIDS_PER_TAP)
            .map(|i| doppler_hz * ((2.0 * PI * i as f64 + rotation) / m).cos())
            .collect();
        let scatter_phases = (0..SINUSOIDS_PER_TAP)
            .map(|_| rng.gen_range(0.0..2.0 * PI))
            .collect();
        let los = k_factor_db.map(|k| LosComponent {
            k_factor: 10f64.powf(k / 10.0),
            doppler_hz: doppler_hz * rng.gen_range(-PI..PI).cos(),
            phase: rng.gen_range(0.0..2.0 * PI),
        });
        Self {
            scatter_doppler_hz,
            scatter_phases,
            los,
        }
    }

    pub fn gain_at(&self, t: f64) -> Complex64 {
        let k = self.los.as_ref().map_or(0.0, |l| l.k_factor);
        let scatter: Complex64 = self
            .scatter_doppler_hz
            .iter()
            .zip(&self.scatter_phases)
            .map(|(f, p)| Complex64::from_polar(1.0, 2.0 * PI * f * t + p))
            .sum();
        let mut g = scatter * (1.0 / ((k + 1.0) * self.scatter_doppler_hz.len() as f64)).sqrt();
        if let Some(los) = &self.los {
            g += Complex64::from_polar(
                (k / (k + 1.0)).sqrt(),
                2.0 * PI * los.doppler_hz * t + los.phase,
            );
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TapFading {
    Static(Complex64),
    Jakes(JakesProcess),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FadingTap {
    pub delay_samples: usize,
    /// Linear mean power of the tap.
    pub power: f64,
    pub fading: TapFading,
}

impl FadingTap {
    pub fn gain_at(&self, t: f64) -> Complex64 {
        match &self.fading {
            TapFading::Static(g) => *g,
            TapFading::Jakes(p) => p.gain_at(t) * self.power.sqrt(),
        }
    }
}

/// One time-varying TDL draw. Tap gains are kept in parametric form and
/// evaluated on demand; [`ChannelRealization::tap_gains`] materializes the
/// full `[num_taps x num_samples]` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub profile: TdlProfile,
    pub doppler_hz: f64,
    pub delay_spread_s: f64,
    pub rate_hz: f64,
    pub num_samples: usize,
    pub taps: Vec<FadingTap>,
}

impl ChannelRealization {
    /// Time-invariant channel from explicit integer delays and gains.
    pub fn from_static_taps(delays: &[usize], gains: &[Complex64], rate_hz: f64, num_samples: usize) -> Self {
        let taps = delays
            .iter()
            .zip(gains)
            .map(|(&d, &g)| FadingTap {
                delay_samples: d,
                power: g.norm_sqr(),
                fading: TapFading::Static(g),
            })
            .collect();
        Self {
            profile: TdlProfile {
                name: TdlKind::A,
                tap_delays_s: delays.iter().map(|&d| d as f64 / rate_hz).collect(),
                tap_powers_db: gains.iter().map(|g| 10.0 * g.norm_sqr().log10()).collect(),
                k_factor_db: None,
            },
            doppler_hz: 0.0,
            delay_spread_s: 0.0,
            rate_hz,
            num_samples,
            taps,
        }
    }

    pub fn tap_gain_series(&self, tap: usize, len: usize) -> Vec<Complex64> {
        let t = &self.taps[tap];
        match &t.fading {
            TapFading::Static(g) => vec![*g; len],
            TapFading::Jakes(_) => {
                let points = len.div_ceil(GAIN_GRID) + 1;
                let grid: Vec<Complex64> = (0..points)
                    .map(|i| t.gain_at((i * GAIN_GRID) as f64 / self.rate_hz))
                    .collect();
                (0..len)
                    .map(|n| {
                        let (i, r) = (n / GAIN_GRID, (n % GAIN_GRID) as f64 / GAIN_GRID as f64);
                        grid[i] * (1.0 - r) + grid[i + 1] * r
                    })
                    .collect()
            }
        }
    }

    pub fn tap_gains(&self) -> Vec<Vec<Complex64>> {
        (0..self.taps.len())
            .map(|l| self.tap_gain_series(l, self.num_samples))
            .collect()
    }
}

/// Draws a TDL profile uniformly, Doppler uniformly in [1, 300] Hz and the
/// delay spread log-uniformly in [30, 300] ns.
pub fn draw_channel(ctx: SeedContext, duration_samples: usize, rate_hz: f64) -> ChannelRealization {
    let mut rng = ctx.stream();
    let kind = TdlKind::ALL[rng.gen_range(0..TdlKind::ALL.len())];
    let doppler_hz = rng.gen_range(DOPPLER_RANGE_HZ.0..=DOPPLER_RANGE_HZ.1);
    let (lo, hi) = DELAY_SPREAD_RANGE_S;
    let delay_spread_s = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
    let profile = TdlProfile::new(kind, delay_spread_s);
    let taps = profile
        .tap_delays_s
        .iter()
        .zip(profile.linear_powers())
        .enumerate()
        .map(|(l, (&delay, power))| {
            let k = if l == 0 { profile.k_factor_db } else { None };
            FadingTap {
                delay_samples: (delay * rate_hz).round() as usize,
                power,
                fading: TapFading::Jakes(JakesProcess::draw(doppler_hz, k, &mut rng)),
            }
        })
        .collect();
    ChannelRealization {
        profile,
        doppler_hz,
        delay_spread_s,
        rate_hz,
        num_samples: duration_samples,
        taps,
    }
}

/// `y[n] = sum_l g_l[n] x[n - d_l]`, zero history before the buffer start.
pub fn apply_channel(x: &IqBuffer, ch: &ChannelRealization) -> Result<IqBuffer> {
    if ch.num_samples < x.len() {
        return param(format!(
            "channel covers {} samples, signal has {}",
            ch.num_samples,
            x.len()
        ));
    }
    let n = x.len();
    let mut y: Option<Vec<Complex64>> = None;
    for (l, tap) in ch.taps.iter().enumerate() {
        let gains = ch.tap_gain_series(l, n);
        let d = tap.delay_samples;
        let out = y.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); n]);
        if l == 0 && d == 0 {
            // first contribution written directly so a unit static tap is exact
            for ((o, g), s) in out.iter_mut().zip(&gains).zip(&x.samples) {
                *o = s * g;
            }
            continue;
        }
        for i in d..n {
            out[i] += x.samples[i - d] * gains[i];
        }
    }
    Ok(x.with_samples(y.unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); n])))
}
