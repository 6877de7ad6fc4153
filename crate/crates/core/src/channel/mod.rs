//! Per-source propagation: TDL multipath with Jakes Doppler, plus AWGN.

mod fading;
pub mod tdl;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::iq::IqBuffer;
use crate::rng::SeedContext;

pub use fading::{
    apply_channel, draw_channel, ChannelRealization, FadingTap, JakesProcess, LosComponent,
    TapFading, DELAY_SPREAD_RANGE_S, DOPPLER_RANGE_HZ, SINUSOIDS_PER_TAP,
};
pub use tdl::{TdlKind, TdlProfile};

pub const SNR_RANGE_DB: (f64, f64) = (0.0, 30.0);

/// Circularly-symmetric complex Gaussian noise of the given power.
pub fn complex_noise(len: usize, power: f64, ctx: SeedContext) -> Vec<Complex64> {
    let mut rng = ctx.stream();
    let sigma = (power / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * sigma, im * sigma)
        })
        .collect()
}

/// Adds noise at `signal_power / 10^(snr_db/10)`. `snr_db = +inf` disables
/// the noise and returns an exact copy.
pub fn add_awgn(x: &IqBuffer, snr_db: f64, ctx: SeedContext) -> IqBuffer {
    if snr_db == f64::INFINITY {
        return x.clone();
    }
    let noise_power = x.power() / 10f64.powf(snr_db / 10.0);
    let noise = complex_noise(x.len(), noise_power, ctx);
    x.with_samples(x.samples.iter().zip(noise).map(|(s, w)| s + w).collect())
}
