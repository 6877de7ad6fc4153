//! Per-source hardware impairments: PA compression (Rapp), I/Q imbalance,
//! Wiener phase noise, carrier frequency offset and DC offset.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::iq::IqBuffer;
use crate::rng::{SeedContext, Stream};
use crate::waveforms::StandardId;

pub const CFO_PPM_RANGE: (f64, f64) = (0.05, 5.0);
pub const IQ_AMP_DB_RANGE: (f64, f64) = (0.1, 3.0);
pub const IQ_PHASE_DEG_RANGE: (f64, f64) = (1.0, 10.0);
pub const PHASE_NOISE_DBC_RANGE: (f64, f64) = (-110.0, -90.0);
pub const DC_DBC_RANGE: (f64, f64) = (-40.0, -30.0);
pub const PA_IBO_DB_RANGE: (f64, f64) = (3.0, 9.0);
pub const RAPP_SMOOTHNESS: f64 = 2.0;
/// Offset at which the phase-noise level is specified.
pub const PHASE_NOISE_OFFSET_HZ: f64 = 10e3;

/// Parameters of one impairment chain. `None` switches a stage off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentDraw {
    pub cfo_hz: f64,
    pub cfo_ppm: f64,
    pub iq_amp_db: f64,
    pub iq_phase_deg: f64,
    pub pn_dbc_hz_at_10khz: Option<f64>,
    pub dc_offset_dbc: Option<f64>,
    pub pa_ibo_db: Option<f64>,
    pub rapp_p: f64,
}

impl ImpairmentDraw {
    /// Every stage at its identity setting.
    pub fn neutral() -> Self {
        Self {
            cfo_hz: 0.0,
            cfo_ppm: 0.0,
            iq_amp_db: 0.0,
            iq_phase_deg: 0.0,
            pn_dbc_hz_at_10khz: None,
            dc_offset_dbc: None,
            pa_ibo_db: None,
            rapp_p: RAPP_SMOOTHNESS,
        }
    }
}

pub fn cfo_from_ppm(standard: StandardId, ppm: f64) -> f64 {
    ppm * 1e-6 * standard.nominal_carrier_hz()
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, range: (f64, f64)) -> f64 {
    rng.gen_range(range.0..=range.1)
}

/// Draws every parameter uniformly over its range; the CFO magnitude is
/// log-uniform in ppm with a uniformly random sign.
pub fn draw_impairments(standard: StandardId, ctx: SeedContext) -> ImpairmentDraw {
    let mut rng = ctx.stream();
    let (lo, hi) = CFO_PPM_RANGE;
    let magnitude = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
    let ppm = if rng.gen::<bool>() { magnitude } else { -magnitude };
    ImpairmentDraw {
        cfo_hz: cfo_from_ppm(standard, ppm),
        cfo_ppm: ppm,
        iq_amp_db: uniform(&mut rng, IQ_AMP_DB_RANGE),
        iq_phase_deg: uniform(&mut rng, IQ_PHASE_DEG_RANGE),
        pn_dbc_hz_at_10khz: Some(uniform(&mut rng, PHASE_NOISE_DBC_RANGE)),
        dc_offset_dbc: Some(uniform(&mut rng, DC_DBC_RANGE)),
        pa_ibo_db: Some(uniform(&mut rng, PA_IBO_DB_RANGE)),
        rapp_p: RAPP_SMOOTHNESS,
    }
}

pub fn apply_cfo(x: &IqBuffer, cfo_hz: f64) -> IqBuffer {
    if cfo_hz == 0.0 {
        return x.clone();
    }
    let w = 2.0 * PI * cfo_hz / x.sample_rate_hz;
    x.with_samples(
        x.samples
            .iter()
            .enumerate()
            .map(|(n, s)| s * Complex64::from_polar(1.0, w * n as f64))
            .collect(),
    )
}

/// Image gains `(G1, G2)` of `y = G1 x + G2 conj(x)`.
pub fn iq_gains(amp_db: f64, phase_deg: f64) -> (Complex64, Complex64) {
    let g = 10f64.powf(amp_db / 20.0);
    let theta = phase_deg.to_radians();
    let g1 = (Complex64::new(1.0, 0.0) + Complex64::from_polar(g, -theta)) * 0.5;
    let g2 = (Complex64::new(1.0, 0.0) - Complex64::from_polar(g, theta)) * 0.5;
    (g1, g2)
}

pub fn apply_iq_imbalance(x: &IqBuffer, amp_db: f64, phase_deg: f64) -> IqBuffer {
    if amp_db == 0.0 && phase_deg == 0.0 {
        return x.clone();
    }
    let (g1, g2) = iq_gains(amp_db, phase_deg);
    x.with_samples(x.samples.iter().map(|s| g1 * s + g2 * s.conj()).collect())
}

/// Per-sample variance of the phase increments giving `dbc_hz` of phase
/// PSD at 10 kHz offset.
pub fn phase_noise_step_variance(dbc_hz: f64, rate_hz: f64) -> f64 {
    10f64.powf(dbc_hz / 10.0) * (2.0 * PI * PHASE_NOISE_OFFSET_HZ).powi(2) / rate_hz
}

fn phase_noise_with(x: &IqBuffer, dbc_hz: f64, rng: &mut Stream) -> IqBuffer {
    if dbc_hz == f64::NEG_INFINITY {
        return x.clone();
    }
    let sigma = phase_noise_step_variance(dbc_hz, x.sample_rate_hz).sqrt();
    let step = Normal::new(0.0, sigma).expect("finite sigma");
    let mut phi = 0.0;
    x.with_samples(
        x.samples
            .iter()
            .map(|s| {
                phi += step.sample(rng);
                s * Complex64::from_polar(1.0, phi)
            })
            .collect(),
    )
}

/// Multiplies by `exp(j phi[n])` where `phi` is a Gaussian random walk.
/// `dbc_hz = -inf` disables the stage.
pub fn apply_phase_noise(x: &IqBuffer, dbc_hz: f64, ctx: SeedContext) -> IqBuffer {
    phase_noise_with(x, dbc_hz, &mut ctx.stream())
}

fn dc_offset_with(x: &IqBuffer, dc_dbc: f64, rng: &mut Stream) -> IqBuffer {
    if dc_dbc == f64::NEG_INFINITY {
        return x.clone();
    }
    let mag = (x.power() * 10f64.powf(dc_dbc / 10.0)).sqrt();
    let c = Complex64::from_polar(mag, rng.gen_range(0.0..2.0 * PI));
    x.with_samples(x.samples.iter().map(|s| s + c).collect())
}

/// Adds a constant `c` with `|c|^2 = P * 10^(dc/10)` and a random angle.
pub fn apply_dc_offset(x: &IqBuffer, dc_dbc: f64, ctx: SeedContext) -> IqBuffer {
    dc_offset_with(x, dc_dbc, &mut ctx.stream())
}

/// Memoryless Rapp AM/AM compression with saturation set `ibo_db` above
/// the input mean power.
pub fn apply_pa_rapp(x: &IqBuffer, ibo_db: f64, p: f64) -> Result<IqBuffer> {
    if !(p > 0.0) {
        return param(format!("Rapp smoothness must be positive, got {p}"));
    }
    if ibo_db == f64::INFINITY {
        return Ok(x.clone());
    }
    let a_sat = (x.power() * 10f64.powf(ibo_db / 10.0)).sqrt();
    Ok(x.with_samples(x.samples.iter().map(|s| rapp(*s, a_sat, p)).collect()))
}

pub fn rapp(x: Complex64, a_sat: f64, p: f64) -> Complex64 {
    x / (1.0 + (x.norm() / a_sat).powf(2.0 * p)).powf(1.0 / (2.0 * p))
}

/// PA -> IQ imbalance -> phase noise -> CFO -> DC offset, then rescaled to
/// the input power.
pub fn apply_chain(x: &IqBuffer, d: &ImpairmentDraw, ctx: SeedContext) -> Result<IqBuffer> {
    let mut rng = ctx.stream();
    let y = apply_pa_rapp(x, d.pa_ibo_db.unwrap_or(f64::INFINITY), d.rapp_p)?;
    let y = apply_iq_imbalance(&y, d.iq_amp_db, d.iq_phase_deg);
    let y = phase_noise_with(&y, d.pn_dbc_hz_at_10khz.unwrap_or(f64::NEG_INFINITY), &mut rng);
    let y = apply_cfo(&y, d.cfo_hz);
    let mut y = dc_offset_with(&y, d.dc_offset_dbc.unwrap_or(f64::NEG_INFINITY), &mut rng);
    let p_in = x.power();
    let p_out = y.power();
    if p_out > 0.0 && p_in != p_out {
        y.scale((p_in / p_out).sqrt());
    }
    Ok(y)
}
