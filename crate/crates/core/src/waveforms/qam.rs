use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Square QAM constellation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u32", try_from = "u32")]
pub enum QamOrder {
    Qpsk,
    Qam16,
    Qam64,
}

impl QamOrder {
    pub const ALL: [QamOrder; 3] = [QamOrder::Qpsk, QamOrder::Qam16, QamOrder::Qam64];

    pub fn order(self) -> u32 {
        match self {
            QamOrder::Qpsk => 4,
            QamOrder::Qam16 => 16,
            QamOrder::Qam64 => 64,
        }
    }

    fn levels(self) -> u32 {
        match self {
            QamOrder::Qpsk => 2,
            QamOrder::Qam16 => 4,
            QamOrder::Qam64 => 8,
        }
    }

    /// All constellation points, scaled to unit average energy.
    pub fn constellation(self) -> Vec<Complex64> {
        let m = self.levels();
        let scale = (2.0 * (self.order() as f64 - 1.0) / 3.0).sqrt();
        let level = |i: u32| (2.0 * i as f64 - (m as f64 - 1.0)) / scale;
        (0..m)
            .flat_map(|i| (0..m).map(move |q| Complex64::new(level(i), level(q))))
            .collect()
    }

    pub fn random_symbol<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        let m = self.levels();
        let scale = (2.0 * (self.order() as f64 - 1.0) / 3.0).sqrt();
        let level = |i: u32| (2.0 * i as f64 - (m as f64 - 1.0)) / scale;
        Complex64::new(level(rng.gen_range(0..m)), level(rng.gen_range(0..m)))
    }
}

impl From<QamOrder> for u32 {
    fn from(q: QamOrder) -> u32 {
        q.order()
    }
}

impl TryFrom<u32> for QamOrder {
    type Error = String;

    fn try_from(v: u32) -> Result<Self, String> {
        match v {
            4 => Ok(QamOrder::Qpsk),
            16 => Ok(QamOrder::Qam16),
            64 => Ok(QamOrder::Qam64),
            _ => Err(format!("unsupported QAM order {v}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constellations_have_unit_energy() {
        for q in QamOrder::ALL {
            let pts = q.constellation();
            assert_eq!(pts.len() as u32, q.order());
            let e = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / pts.len() as f64;
            assert!((e - 1.0).abs() < 1e-12);
        }
    }
}
