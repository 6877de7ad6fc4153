//! Tapped-delay-line power delay profiles (TR 38.901 TDL-A..E).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TdlKind {
    #[serde(rename = "TDL-A")]
    A,
    #[serde(rename = "TDL-B")]
    B,
    #[serde(rename = "TDL-C")]
    C,
    #[serde(rename = "TDL-D")]
    D,
    #[serde(rename = "TDL-E")]
    E,
}

// (normalized delay, power dB). For D and E the first row is the LOS path
// and the second the Rayleigh part of the same (zero-delay) tap.
const TDL_A: &[(f64, f64)] = &[
    (0.0000, -13.4), (0.3819, 0.0), (0.4025, -2.2), (0.5868, -4.0), (0.4610, -6.0),
    (0.5375, -8.2), (0.6708, -9.9), (0.5750, -10.5), (0.7618, -7.5), (1.5375, -15.9),
    (1.8978, -6.6), (2.2242, -16.7), (2.1718, -12.4), (2.4942, -15.2), (2.5119, -10.8),
    (3.0582, -11.3), (4.0810, -12.7), (4.4579, -16.2), (4.5695, -18.3), (4.7966, -18.9),
    (5.0066, -16.6), (5.3043, -19.9), (9.6586, -29.7),
];
const TDL_B: &[(f64, f64)] = &[
    (0.0000, 0.0), (0.1072, -2.2), (0.2155, -4.0), (0.2095, -3.2), (0.2870, -9.8),
    (0.2986, -1.2), (0.3752, -3.4), (0.5055, -5.2), (0.3681, -7.6), (0.3697, -3.0),
    (0.5700, -8.9), (0.5283, -9.0), (1.1021, -4.8), (1.2756, -5.7), (1.5474, -7.5),
    (1.7842, -1.9), (2.0169, -7.6), (2.8294, -12.2), (3.0219, -9.8), (3.6187, -11.4),
    (4.1067, -14.9), (4.2790, -9.2), (4.7834, -11.3),
];
const TDL_C: &[(f64, f64)] = &[
    (0.0000, -4.4), (0.2099, -1.2), (0.2219, -3.5), (0.2329, -5.2), (0.2176, -2.5),
    (0.6366, 0.0), (0.6448, -2.2), (0.6560, -3.9), (0.6584, -7.4), (0.7935, -7.1),
    (0.8213, -10.7), (0.9336, -11.1), (1.2285, -5.1), (1.3083, -6.8), (2.1704, -8.7),
    (2.7105, -13.2), (4.2589, -13.9), (4.6003, -13.9), (5.4902, -15.8), (5.6077, -17.1),
    (6.3065, -16.0), (6.6374, -15.7), (7.0427, -21.6), (8.6523, -22.8),
];
const TDL_D: &[(f64, f64)] = &[
    (0.0, -0.2), (0.0, -13.5), (0.035, -18.8), (0.612, -21.0), (1.363, -22.8),
    (1.405, -17.9), (1.804, -20.1), (2.596, -21.9), (1.775, -22.9), (4.042, -27.8),
    (7.937, -23.6), (9.424, -24.8), (9.708, -30.0), (12.525, -27.7),
];
const TDL_E: &[(f64, f64)] = &[
    (0.0, -0.03), (0.0, -22.03), (0.5133, -15.8), (0.5440, -18.1), (0.5630, -19.8),
    (0.5440, -22.9), (0.7112, -22.4), (1.9092, -18.6), (1.9293, -20.8), (1.9589, -22.6),
    (2.6426, -22.3), (3.7136, -25.6), (5.4524, -20.2), (12.0034, -29.8), (20.6519, -29.2),
];

impl TdlKind {
    pub const ALL: [TdlKind; 5] = [TdlKind::A, TdlKind::B, TdlKind::C, TdlKind::D, TdlKind::E];

    pub fn name(self) -> &'static str {
        match self {
            TdlKind::A => "TDL-A",
            TdlKind::B => "TDL-B",
            TdlKind::C => "TDL-C",
            TdlKind::D => "TDL-D",
            TdlKind::E => "TDL-E",
        }
    }

    pub fn is_los(self) -> bool {
        matches!(self, TdlKind::D | TdlKind::E)
    }

    fn table(self) -> &'static [(f64, f64)] {
        match self {
            TdlKind::A => TDL_A,
            TdlKind::B => TDL_B,
            TdlKind::C => TDL_C,
            TdlKind::D => TDL_D,
            TdlKind::E => TDL_E,
        }
    }
}

impl fmt::Display for TdlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TdlKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TdlKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown TDL profile {s:?}")))
    }
}

/// A delay-scaled TDL profile with total tap power normalized to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdlProfile {
    pub name: TdlKind,
    pub tap_delays_s: Vec<f64>,
    /// Per-tap power; for LOS profiles the first entry is LOS plus scatter.
    pub tap_powers_db: Vec<f64>,
    pub k_factor_db: Option<f64>,
}

impl TdlProfile {
    pub fn new(name: TdlKind, delay_spread_s: f64) -> Self {
        let table = name.table();
        let (mut delays, mut powers): (Vec<f64>, Vec<f64>) = table
            .iter()
            .map(|&(d, p)| (d * delay_spread_s, 10f64.powf(p / 10.0)))
            .unzip();
        let mut k_factor_db = None;
        if name.is_los() {
            let los = powers.remove(0);
            delays.remove(0);
            k_factor_db = Some(10.0 * (los / powers[0]).log10());
            powers[0] += los;
        }
        let total: f64 = powers.iter().sum();
        let tap_powers_db = powers.iter().map(|p| 10.0 * (p / total).log10()).collect();
        Self {
            name,
            tap_delays_s: delays,
            tap_powers_db,
            k_factor_db,
        }
    }

    pub fn num_taps(&self) -> usize {
        self.tap_delays_s.len()
    }

    pub fn linear_powers(&self) -> Vec<f64> {
        self.tap_powers_db.iter().map(|p| 10f64.powf(p / 10.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_normalized_with_expected_k_factors() {
        for kind in TdlKind::ALL {
            let p = TdlProfile::new(kind, 100e-9);
            let total: f64 = p.linear_powers().iter().sum();
            assert!((total - 1.0).abs() <= 1e-9, "{kind}");
            assert_eq!(p.tap_delays_s.len(), p.tap_powers_db.len());
            assert_eq!(p.k_factor_db.is_some(), kind.is_los());
        }
        let d = TdlProfile::new(TdlKind::D, 100e-9).k_factor_db.unwrap();
        let e = TdlProfile::new(TdlKind::E, 100e-9).k_factor_db.unwrap();
        assert!((d - 13.3).abs() < 1e-9);
        assert!((e - 22.0).abs() < 1e-9);
    }

    #[test]
    fn tap_counts() {
        let counts: Vec<usize> = TdlKind::ALL
            .iter()
            .map(|&k| TdlProfile::new(k, 1e-7).num_taps())
            .collect();
        assert_eq!(counts, vec![23, 23, 24, 13, 14]);
    }

    #[test]
    fn names_parse() {
        for k in TdlKind::ALL {
            assert_eq!(k.name().parse::<TdlKind>().unwrap(), k);
        }
    }
}
