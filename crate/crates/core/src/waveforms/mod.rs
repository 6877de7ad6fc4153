//! Standards-driven baseband generators.
//!
//! Each generator returns `duration_samples` samples at 30.72 MHz scaled to
//! unit average power.

pub mod gsm;
pub mod ofdm;
pub mod qam;
pub mod umts;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iq::IqBuffer;
use crate::rng::SeedContext;
use crate::SAMPLE_LEN;

pub use qam::QamOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StandardId {
    #[serde(rename = "GSM")]
    Gsm,
    #[serde(rename = "UMTS")]
    Umts,
    #[serde(rename = "LTE")]
    Lte,
    #[serde(rename = "NR")]
    Nr,
}

impl StandardId {
    pub const ALL: [StandardId; 4] = [
        StandardId::Gsm,
        StandardId::Umts,
        StandardId::Lte,
        StandardId::Nr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StandardId::Gsm => "GSM",
            StandardId::Umts => "UMTS",
            StandardId::Lte => "LTE",
            StandardId::Nr => "NR",
        }
    }

    /// Nominal carrier used to turn a ppm oscillator error into Hz.
    pub fn nominal_carrier_hz(self) -> f64 {
        match self {
            StandardId::Gsm => 900e6,
            StandardId::Umts => 2.1e9,
            StandardId::Lte => 1.8e9,
            StandardId::Nr => 3.5e9,
        }
    }
}

impl fmt::Display for StandardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StandardId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GSM" => Ok(StandardId::Gsm),
            "UMTS" => Ok(StandardId::Umts),
            "LTE" => Ok(StandardId::Lte),
            "NR" | "5G" | "5GNR" => Ok(StandardId::Nr),
            _ => Err(Error::Parameter(format!("unknown standard {s:?}"))),
        }
    }
}

pub const LTE_MAX_SUBCARRIERS: usize = 600;
pub const NR_MAX_SUBCARRIERS: usize = 960;
pub const NR_DEFAULT_SUBCARRIERS: usize = 792;
/// NR width used in adjacent-channel mixtures so the band fits beside the others.
pub const NR_ADJACENT_SUBCARRIERS: usize = 368;
pub const UMTS_MAX_USERS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    pub standard: StandardId,
    pub duration_samples: usize,
    pub qam_order: QamOrder,
    pub num_users: usize,
    pub numerology_mu: u8,
    pub occupied_subcarriers: usize,
}

impl WaveformConfig {
    /// Default full-load configuration for a dataset-length sample.
    pub fn new(standard: StandardId) -> Self {
        let occupied_subcarriers = match standard {
            StandardId::Lte => LTE_MAX_SUBCARRIERS,
            StandardId::Nr => NR_DEFAULT_SUBCARRIERS,
            _ => 0,
        };
        Self {
            standard,
            duration_samples: SAMPLE_LEN,
            qam_order: QamOrder::Qpsk,
            num_users: 1,
            numerology_mu: 1,
            occupied_subcarriers,
        }
    }

    pub fn with_duration(self, duration_samples: usize) -> Self {
        Self {
            duration_samples,
            ..self
        }
    }

    /// Per-sample random parameters: 1..=4 UMTS users and a uniformly drawn
    /// QAM order for the OFDM standards.
    pub fn draw<R: Rng + ?Sized>(standard: StandardId, adjacent: bool, rng: &mut R) -> Self {
        let mut cfg = Self::new(standard);
        match standard {
            StandardId::Umts => cfg.num_users = rng.gen_range(1..=4),
            StandardId::Lte => cfg.qam_order = QamOrder::ALL[rng.gen_range(0..3)],
            StandardId::Nr => {
                cfg.qam_order = QamOrder::ALL[rng.gen_range(0..3)];
                if adjacent {
                    cfg.occupied_subcarriers = NR_ADJACENT_SUBCARRIERS;
                }
            }
            StandardId::Gsm => {}
        }
        cfg
    }

    /// Nominal occupied bandwidth in Hz, used for band planning.
    pub fn nominal_bandwidth_hz(&self) -> f64 {
        match self.standard {
            StandardId::Gsm => 200e3,
            StandardId::Umts => umts::CHIP_RATE_HZ * (1.0 + umts::ROLLOFF),
            StandardId::Lte => self.occupied_subcarriers as f64 * 15e3,
            StandardId::Nr => self.occupied_subcarriers as f64 * 30e3,
        }
    }
}

/// Generates one source waveform for `cfg`.
pub fn generate(cfg: &WaveformConfig, ctx: SeedContext) -> Result<IqBuffer> {
    match cfg.standard {
        StandardId::Gsm => gsm::gen_gsm(cfg, ctx),
        StandardId::Umts => umts::gen_umts(cfg, ctx),
        StandardId::Lte => ofdm::gen_lte(cfg, ctx),
        StandardId::Nr => ofdm::gen_nr(cfg, ctx),
    }
}

pub(crate) fn expect_standard(cfg: &WaveformConfig, want: StandardId) -> Result<()> {
    if cfg.standard != want {
        return Err(Error::Parameter(format!(
            "{} generator called with a {} config",
            want, cfg.standard
        )));
    }
    if cfg.duration_samples == 0 {
        return Err(Error::Parameter("duration must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_names_round_trip() {
        for s in StandardId::ALL {
            assert_eq!(s.name().parse::<StandardId>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
        assert!("WiFi".parse::<StandardId>().is_err());
    }
}
