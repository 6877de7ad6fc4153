//! W-CDMA downlink: OVSF spreading, Gold scrambling and RRC chip shaping.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use super::{expect_standard, StandardId, WaveformConfig, UMTS_MAX_USERS};
use crate::dsp::{design_filter, filter_centered, FilterSpec};
use crate::error::{param, Result};
use crate::iq::IqBuffer;
use crate::rng::SeedContext;
use crate::CORPUS_RATE_HZ;

pub const CHIP_RATE_HZ: f64 = 3.84e6;
pub const ROLLOFF: f64 = 0.22;
pub const SPREADING_FACTOR: usize = 16;
/// 30.72 MHz / 3.84 Mcps.
pub const SAMPLES_PER_CHIP: usize = 8;
const GOLD_PERIOD: usize = (1 << 18) - 1;
/// Offset between the I and Q branches of the complex scrambling code.
const Q_BRANCH_SHIFT: usize = 131_072;
const GUARD_CHIPS: usize = 12;

/// OVSF code `index` of spreading factor `sf` (a power of two), built with
/// `C(2n, 2k) = [C(n,k), C(n,k)]` and `C(2n, 2k+1) = [C(n,k), -C(n,k)]`.
pub fn ovsf_code(sf: usize, index: usize) -> Result<Vec<i8>> {
    if !sf.is_power_of_two() || index >= sf {
        return param(format!("no OVSF code {index} at spreading factor {sf}"));
    }
    let mut code = vec![1i8];
    // walk the tree from the root using the bits of `index`, MSB first
    let depth = sf.trailing_zeros();
    for level in (0..depth).rev() {
        let odd = (index >> level) & 1 == 1;
        let mut next = code.clone();
        next.extend(code.iter().map(|&c| if odd { -c } else { c }));
        code = next;
    }
    Ok(code)
}

pub fn ovsf_codes(sf: usize) -> Result<Vec<Vec<i8>>> {
    (0..sf).map(|k| ovsf_code(sf, k)).collect()
}

struct GoldTables {
    x: Vec<u8>,
    y: Vec<u8>,
}

/// One period of the two m-sequences: `x` from `1 + x^7 + x^18` seeded with
/// a single 1, `y` from `1 + x^5 + x^7 + x^10 + x^18` seeded with all ones.
fn gold_tables() -> &'static GoldTables {
    static TABLES: OnceLock<GoldTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut xs: u32 = 1;
        let mut ys: u32 = (1 << 18) - 1;
        let mut x = Vec::with_capacity(GOLD_PERIOD);
        let mut y = Vec::with_capacity(GOLD_PERIOD);
        for _ in 0..GOLD_PERIOD {
            x.push((xs & 1) as u8);
            y.push((ys & 1) as u8);
            let xn = (xs ^ (xs >> 7)) & 1;
            let yn = (ys ^ (ys >> 5) ^ (ys >> 7) ^ (ys >> 10)) & 1;
            xs = (xs >> 1) | (xn << 17);
            ys = (ys >> 1) | (yn << 17);
        }
        GoldTables { x, y }
    })
}

/// Real Gold sequence `Z_n(i)` in {+1, -1}.
pub fn gold_chip(code: usize, i: usize) -> i8 {
    let t = gold_tables();
    let z = t.x[(i + code) % GOLD_PERIOD] ^ t.y[i % GOLD_PERIOD];
    1 - 2 * z as i8
}

/// Complex downlink scrambling code, unit magnitude.
pub fn scrambling_code(code: usize, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| {
            Complex64::new(
                gold_chip(code, i) as f64,
                gold_chip(code, (i + Q_BRANCH_SHIFT) % GOLD_PERIOD) as f64,
            ) * FRAC_1_SQRT_2
        })
        .collect()
}

/// Sum of `sqrt(P_i) * d_i[k] * c_i[k]` over users at chip rate.
pub fn spread(user_symbols: &[Vec<Complex64>], codes: &[Vec<i8>], powers: &[f64]) -> Vec<Complex64> {
    let sf = codes.first().map_or(1, Vec::len);
    let n_chips = user_symbols.iter().map(Vec::len).max().unwrap_or(0) * sf;
    let mut chips = vec![Complex64::new(0.0, 0.0); n_chips];
    for ((symbols, code), &p) in user_symbols.iter().zip(codes).zip(powers) {
        let amp = p.sqrt();
        for (c, chip) in chips.iter_mut().enumerate().take(symbols.len() * sf) {
            *chip += symbols[c / sf] * (code[c % sf] as f64 * amp);
        }
    }
    chips
}

/// Correlates chips against one code, one value per symbol.
pub fn despread(chips: &[Complex64], code: &[i8]) -> Vec<Complex64> {
    let sf = code.len();
    chips
        .chunks_exact(sf)
        .map(|block| {
            block
                .iter()
                .zip(code)
                .map(|(c, &k)| c * k as f64)
                .sum::<Complex64>()
                / sf as f64
        })
        .collect()
}

fn random_qpsk<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let i = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let q = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    Complex64::new(i, q) * FRAC_1_SQRT_2
}

pub fn gen_umts(cfg: &WaveformConfig, ctx: SeedContext) -> Result<IqBuffer> {
    expect_standard(cfg, StandardId::Umts)?;
    if !(1..=UMTS_MAX_USERS).contains(&cfg.num_users) {
        return param(format!(
            "UMTS user count must be 1..={UMTS_MAX_USERS}, got {}",
            cfg.num_users
        ));
    }
    let mut rng = ctx.stream();
    let n_chips = cfg.duration_samples.div_ceil(SAMPLES_PER_CHIP) + 2 * GUARD_CHIPS;
    let n_symbols = n_chips.div_ceil(SPREADING_FACTOR);

    let code_ids = sample(&mut rng, SPREADING_FACTOR, cfg.num_users).into_vec();
    let codes = code_ids
        .iter()
        .map(|&k| ovsf_code(SPREADING_FACTOR, k))
        .collect::<Result<Vec<_>>>()?;
    let powers = vec![1.0 / cfg.num_users as f64; cfg.num_users];
    let symbols: Vec<Vec<Complex64>> = (0..cfg.num_users)
        .map(|_| (0..n_symbols).map(|_| random_qpsk(&mut rng)).collect())
        .collect();
    // primary scrambling codes are multiples of 16
    let scrambling_id = 16 * rng.gen_range(0..512);

    let chips = spread(&symbols, &codes, &powers);
    let scrambled: Vec<Complex64> = chips
        .iter()
        .zip(scrambling_code(scrambling_id, chips.len()))
        .map(|(c, s)| c * s)
        .collect();

    let mut upsampled = vec![Complex64::new(0.0, 0.0); scrambled.len() * SAMPLES_PER_CHIP];
    for (i, c) in scrambled.iter().enumerate() {
        upsampled[i * SAMPLES_PER_CHIP] = *c;
    }
    let taps = design_filter(&FilterSpec::rrc(ROLLOFF, SAMPLES_PER_CHIP))?;
    let shaped = filter_centered(&upsampled, &taps);
    let skip = GUARD_CHIPS * SAMPLES_PER_CHIP;
    let mut out = IqBuffer::new(
        shaped[skip..skip + cfg.duration_samples].to_vec(),
        CORPUS_RATE_HZ,
    )?;
    out.normalize_power(1.0);
    Ok(out)
}
