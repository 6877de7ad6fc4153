//! Scenario sampling and mixture assembly.
//!
//! Each source runs generate -> channel -> AWGN -> impairments, then is
//! cyclically delayed, frequency shifted and scaled by `sqrt(P_i)` before
//! the sum:
//!
//! `y[n] = sum_i sqrt(P_i) * exp(j 2 pi f_i n / fs) * s_i[n - tau_i]`

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{add_awgn, apply_channel, complex_noise, draw_channel, SNR_RANGE_DB};
use crate::error::{param, Result};
use crate::impairments::{apply_chain, draw_impairments, ImpairmentDraw};
use crate::iq::IqBuffer;
use crate::rng::{SeedContext, StreamTag};
use crate::waveforms::{generate, StandardId, WaveformConfig};
use crate::{CORPUS_RATE_HZ, MAX_SOURCES, SAMPLE_LEN};

pub const SOURCE_COUNT_WEIGHTS: [(usize, f64); 3] = [(2, 0.49), (3, 0.34), (4, 0.17)];
/// Half-width of the uniform power spread relative to source 1.
pub const POWER_SPREAD_DB: f64 = 6.0;
/// Largest cyclic timing offset (100 us at 30.72 MHz).
pub const MAX_TIMING_OFFSET: usize = 3072;

// Lane offsets keep the streams of different per-source stages apart when
// they share a tag.
const IMPAIRMENT_APPLY_LANE: u64 = 16;
const WAVEFORM_CONFIG_LANE: u64 = 32;
const MIXTURE_NOISE_LANE: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingMode {
    CoChannel,
    AdjacentChannel,
}

impl MixingMode {
    pub fn name(self) -> &'static str {
        match self {
            MixingMode::CoChannel => "co_channel",
            MixingMode::AdjacentChannel => "adjacent_channel",
        }
    }
}

impl std::fmt::Display for MixingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MixingMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "co_channel" | "co" => Ok(MixingMode::CoChannel),
            "adjacent_channel" | "adjacent" => Ok(MixingMode::AdjacentChannel),
            other => param(format!("unknown mixing mode {other:?}")),
        }
    }
}

/// Carrier offset of each standard in adjacent-channel mixtures.
pub fn adjacent_offset_hz(standard: StandardId) -> f64 {
    match standard {
        StandardId::Gsm => -13.0e6,
        StandardId::Umts => -8.0e6,
        StandardId::Lte => -1.0e6,
        StandardId::Nr => 9.5e6,
    }
}

/// Where the ground-truth targets are tapped from the source chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetStage {
    #[default]
    Clean,
    PostChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    #[default]
    PerSource,
    Mixture,
}

impl std::str::FromStr for TargetStage {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "clean" => Ok(TargetStage::Clean),
            "post_channel" => Ok(TargetStage::PostChannel),
            other => param(format!("unknown target stage {other:?}")),
        }
    }
}

impl std::str::FromStr for NoiseMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "per_source" => Ok(NoiseMode::PerSource),
            "mixture" => Ok(NoiseMode::Mixture),
            other => param(format!("unknown noise mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDraw {
    pub num_sources: usize,
    pub standards: Vec<StandardId>,
    pub mode: MixingMode,
    pub freq_offsets_hz: Vec<f64>,
    pub powers_db: Vec<f64>,
    pub timing_offsets_samples: Vec<usize>,
    pub snr_db: Vec<f64>,
}

impl ScenarioDraw {
    /// Sets the mode and the matching frequency plan.
    pub fn with_mode(mut self, mode: MixingMode) -> Self {
        self.mode = mode;
        self.freq_offsets_hz = offsets_for(&self.standards, mode);
        self
    }

    pub fn linear_powers(&self) -> Vec<f64> {
        self.powers_db.iter().map(|p| 10f64.powf(p / 10.0)).collect()
    }
}

fn offsets_for(standards: &[StandardId], mode: MixingMode) -> Vec<f64> {
    standards
        .iter()
        .map(|&s| match mode {
            MixingMode::CoChannel => 0.0,
            MixingMode::AdjacentChannel => adjacent_offset_hz(s),
        })
        .collect()
}

fn draw_placement<R: Rng + ?Sized>(
    rng: &mut R,
    standards: Vec<StandardId>,
    mode: MixingMode,
) -> ScenarioDraw {
    let k = standards.len();
    let snr_db = (0..k).map(|_| rng.gen_range(SNR_RANGE_DB.0..=SNR_RANGE_DB.1)).collect();
    let powers_db = (0..k)
        .map(|i| if i == 0 { 0.0 } else { rng.gen_range(-POWER_SPREAD_DB..=POWER_SPREAD_DB) })
        .collect();
    let timing_offsets_samples = (0..k).map(|_| rng.gen_range(0..=MAX_TIMING_OFFSET)).collect();
    ScenarioDraw {
        num_sources: k,
        freq_offsets_hz: offsets_for(&standards, mode),
        standards,
        mode,
        powers_db,
        timing_offsets_samples,
        snr_db,
    }
}

/// Draws the source count (weights 0.49/0.34/0.17), a uniformly random set
/// of distinct standards, the mode, and per-source SNR, power and timing.
pub fn draw_scenario(ctx: SeedContext) -> ScenarioDraw {
    let mut rng = ctx.stream();
    let weights = WeightedIndex::new(SOURCE_COUNT_WEIGHTS.iter().map(|w| w.1)).expect("valid weights");
    let k = SOURCE_COUNT_WEIGHTS[weights.sample(&mut rng)].0;
    let standards = rand::seq::index::sample(&mut rng, StandardId::ALL.len(), k)
        .into_iter()
        .map(|i| StandardId::ALL[i])
        .collect();
    let mode = if rng.gen::<bool>() { MixingMode::CoChannel } else { MixingMode::AdjacentChannel };
    draw_placement(&mut rng, standards, mode)
}

/// Single-source scenario for the per-standard companion corpus.
pub fn draw_single_scenario(standard: StandardId, ctx: SeedContext) -> ScenarioDraw {
    let mut rng = ctx.stream();
    draw_placement(&mut rng, vec![standard], MixingMode::CoChannel)
}

/// Multiplies by `exp(j 2 pi f n / fs)`. Fails if the shifted band of width
/// `occupied_bw_hz` would cross the Nyquist edge.
pub fn frequency_shift(x: &IqBuffer, f_hz: f64, occupied_bw_hz: f64) -> Result<IqBuffer> {
    let nyquist = x.sample_rate_hz / 2.0;
    if f_hz.abs() + occupied_bw_hz / 2.0 > nyquist {
        return param(format!(
            "shift of {f_hz} Hz with {occupied_bw_hz} Hz occupied bandwidth exceeds Nyquist {nyquist} Hz"
        ));
    }
    if f_hz == 0.0 {
        return Ok(x.clone());
    }
    let w = 2.0 * PI * f_hz / x.sample_rate_hz;
    Ok(x.with_samples(
        x.samples
            .iter()
            .enumerate()
            .map(|(n, s)| s * Complex64::from_polar(1.0, w * n as f64))
            .collect(),
    ))
}

/// `y[n] = x[(n - tau) mod N]`.
pub fn cyclic_delay(x: &IqBuffer, tau: usize) -> IqBuffer {
    let mut s = x.samples.clone();
    if !s.is_empty() {
        let n = s.len();
        s.rotate_right(tau % n);
    }
    x.with_samples(s)
}

/// Delay, shift and scale of source `i` in `scenario`.
pub fn place_source(x: &IqBuffer, scenario: &ScenarioDraw, i: usize, occupied_bw_hz: f64) -> Result<IqBuffer> {
    let delayed = cyclic_delay(x, scenario.timing_offsets_samples[i]);
    let mut shifted = frequency_shift(&delayed, scenario.freq_offsets_hz[i], occupied_bw_hz)?;
    let gain = 10f64.powf(scenario.powers_db[i] / 20.0);
    if gain != 1.0 {
        shifted.scale(gain);
    }
    Ok(shifted)
}

fn check_scenario(scenario: &ScenarioDraw, count: usize) -> Result<()> {
    let k = scenario.num_sources;
    if count != k
        || scenario.standards.len() != k
        || scenario.freq_offsets_hz.len() != k
        || scenario.powers_db.len() != k
        || scenario.timing_offsets_samples.len() != k
        || scenario.snr_db.len() != k
    {
        return param(format!("scenario describes {k} sources but {count} were supplied"));
    }
    Ok(())
}

fn sum_sources(placed: &[IqBuffer]) -> Result<IqBuffer> {
    let first = placed.first().ok_or_else(|| crate::Error::Parameter("no sources to mix".into()))?;
    let mut acc = vec![Complex64::new(0.0, 0.0); first.len()];
    for p in placed {
        if p.len() != first.len() || p.sample_rate_hz != first.sample_rate_hz {
            return param("sources differ in length or sample rate");
        }
        for (a, s) in acc.iter_mut().zip(&p.samples) {
            *a += s;
        }
    }
    Ok(first.with_samples(acc))
}

/// Sums the placed sources. The occupied bandwidth used for the Nyquist
/// check is the nominal band of each standard.
pub fn assemble(sources_impaired: &[IqBuffer], scenario: &ScenarioDraw) -> Result<IqBuffer> {
    check_scenario(scenario, sources_impaired.len())?;
    let placed = sources_impaired
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let bw = nominal_bw(scenario, i);
            place_source(s, scenario, i, bw)
        })
        .collect::<Result<Vec<_>>>()?;
    sum_sources(&placed)
}

fn nominal_bw(scenario: &ScenarioDraw, i: usize) -> f64 {
    let adjacent = scenario.mode == MixingMode::AdjacentChannel;
    let mut cfg = WaveformConfig::new(scenario.standards[i]);
    if adjacent && cfg.standard == StandardId::Nr {
        cfg.occupied_subcarriers = crate::waveforms::NR_ADJACENT_SUBCARRIERS;
    }
    cfg.nominal_bandwidth_hz()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub target_stage: TargetStage,
    pub noise_mode: NoiseMode,
    /// Forces every sample into one mixing mode.
    pub mode_filter: Option<MixingMode>,
    pub sample_len: Option<usize>,
}

impl PipelineConfig {
    pub fn len(&self) -> usize {
        self.sample_len.unwrap_or(SAMPLE_LEN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub num_sources: usize,
    pub standards: Vec<StandardId>,
    pub mixing_mode: MixingMode,
    pub snr_db: Vec<f64>,
    pub channel_types: Vec<String>,
    pub impairments: Vec<ImpairmentDraw>,
    pub powers_db: Vec<f64>,
    pub freq_offsets_hz: Vec<f64>,
    pub timing_offsets: Vec<usize>,
    pub master_seed: u64,
    pub sample_index: u64,
    pub waveforms: Vec<WaveformConfig>,
    pub target_stage: TargetStage,
    pub noise_mode: NoiseMode,
    pub mixture_power: f64,
}

impl SampleMetadata {
    pub fn scenario(&self) -> ScenarioDraw {
        ScenarioDraw {
            num_sources: self.num_sources,
            standards: self.standards.clone(),
            mode: self.mixing_mode,
            freq_offsets_hz: self.freq_offsets_hz.clone(),
            powers_db: self.powers_db.clone(),
            timing_offsets_samples: self.timing_offsets.clone(),
            snr_db: self.snr_db.clone(),
        }
    }

    /// Mixture SNR: total source power over total noise power, in dB.
    pub fn mixture_snr_db(&self) -> f64 {
        let powers = self.scenario().linear_powers();
        let signal: f64 = powers.iter().sum();
        let noise: f64 = powers
            .iter()
            .zip(&self.snr_db)
            .map(|(p, s)| p * 10f64.powf(-s / 10.0))
            .sum();
        10.0 * (signal / noise).log10()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metadata serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::Error::Parameter(format!("bad metadata JSON: {e}")))
    }
}

/// One corpus row.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSample {
    pub mixture: IqBuffer,
    pub targets: Vec<IqBuffer>,
    pub scenario: ScenarioDraw,
    pub metadata: SampleMetadata,
}

/// Every per-source intermediate of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTrace {
    pub clean: IqBuffer,
    pub faded: IqBuffer,
    pub noisy: IqBuffer,
    pub impaired: IqBuffer,
    pub placed: IqBuffer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureTrace {
    pub sample: MixtureSample,
    pub sources: Vec<SourceTrace>,
    pub mixture_noise: Option<IqBuffer>,
}

impl MixtureTrace {
    /// Re-sums the stored placed sources (and mixture noise) in pipeline order.
    pub fn resum(&self) -> Result<IqBuffer> {
        let placed: Vec<IqBuffer> = self.sources.iter().map(|s| s.placed.clone()).collect();
        let mut y = sum_sources(&placed)?;
        if let Some(w) = &self.mixture_noise {
            for (a, b) in y.samples.iter_mut().zip(&w.samples) {
                *a += b;
            }
        }
        Ok(y)
    }
}

/// Deterministic sample generator keyed by `(master_seed, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleGenerator {
    pub master_seed: u64,
    pub config: PipelineConfig,
}

impl SampleGenerator {
    pub fn new(master_seed: u64, config: PipelineConfig) -> Self {
        Self { master_seed, config }
    }

    fn ctx(&self, index: u64, tag: StreamTag) -> SeedContext {
        SeedContext::new(self.master_seed, index, tag)
    }

    pub fn scenario(&self, index: u64) -> ScenarioDraw {
        let s = draw_scenario(self.ctx(index, StreamTag::Scenario));
        match self.config.mode_filter {
            Some(mode) => s.with_mode(mode),
            None => s,
        }
    }

    pub fn generate(&self, index: u64) -> Result<MixtureSample> {
        Ok(self.generate_traced(index)?.sample)
    }

    pub fn generate_traced(&self, index: u64) -> Result<MixtureTrace> {
        self.run(index, self.scenario(index))
    }

    /// Single-source row of `standard` at `index`.
    pub fn generate_single(&self, standard: StandardId, index: u64) -> Result<MixtureSample> {
        let scenario = draw_single_scenario(standard, self.ctx(index, StreamTag::Scenario));
        Ok(self.run(index, scenario)?.sample)
    }

    fn run(&self, index: u64, scenario: ScenarioDraw) -> Result<MixtureTrace> {
        let k = scenario.num_sources;
        if !(1..=MAX_SOURCES).contains(&k) {
            return param(format!("{k} sources is outside 1..={MAX_SOURCES}"));
        }
        let len = self.config.len();
        let adjacent = scenario.mode == MixingMode::AdjacentChannel;
        let per_source_noise = self.config.noise_mode == NoiseMode::PerSource;
        let mut sources = Vec::with_capacity(k);
        let mut targets = Vec::with_capacity(k);
        let mut waveforms = Vec::with_capacity(k);
        let mut channel_types = Vec::with_capacity(k);
        let mut impairments = Vec::with_capacity(k);
        for (i, &standard) in scenario.standards.iter().enumerate() {
            let lane = i as u64;
            let mut cfg_rng = self.ctx(index, StreamTag::Scenario).with_lane(WAVEFORM_CONFIG_LANE + lane).stream();
            let cfg = WaveformConfig::draw(standard, adjacent, &mut cfg_rng).with_duration(len);
            let mut clean = generate(&cfg, self.ctx(index, StreamTag::Bits).with_lane(lane))?;
            clean.normalize_power(1.0);

            let ch = draw_channel(self.ctx(index, StreamTag::Channel).with_lane(lane), len, CORPUS_RATE_HZ);
            let faded = apply_channel(&clean, &ch)?;
            let noisy = if per_source_noise {
                add_awgn(&faded, scenario.snr_db[i], self.ctx(index, StreamTag::Noise).with_lane(lane))
            } else {
                faded.clone()
            };
            let imp_ctx = self.ctx(index, StreamTag::Impairment);
            let draw = draw_impairments(standard, imp_ctx.with_lane(lane));
            let impaired = apply_chain(&noisy, &draw, imp_ctx.with_lane(IMPAIRMENT_APPLY_LANE + lane))?;
            let placed = place_source(&impaired, &scenario, i, cfg.nominal_bandwidth_hz())?;

            let target = match self.config.target_stage {
                TargetStage::Clean => clean.clone(),
                TargetStage::PostChannel => {
                    let mut t = faded.clone();
                    t.normalize_power(1.0);
                    t
                }
            };
            targets.push(target);
            waveforms.push(cfg);
            channel_types.push(ch.profile.name.name().to_string());
            impairments.push(draw);
            sources.push(SourceTrace { clean, faded, noisy, impaired, placed });
        }

        let placed: Vec<IqBuffer> = sources.iter().map(|s| s.placed.clone()).collect();
        let mut mixture = sum_sources(&placed)?;
        let mut mixture_noise = None;
        if !per_source_noise {
            let powers = scenario.linear_powers();
            let noise_power: f64 = sources
                .iter()
                .zip(&powers)
                .zip(&scenario.snr_db)
                .map(|((s, p), snr)| p * s.impaired.power() * 10f64.powf(-snr / 10.0))
                .sum();
            let ctx = self.ctx(index, StreamTag::Noise).with_lane(MIXTURE_NOISE_LANE);
            let w = mixture.with_samples(complex_noise(len, noise_power, ctx));
            for (a, b) in mixture.samples.iter_mut().zip(&w.samples) {
                *a += b;
            }
            mixture_noise = Some(w);
        }

        let metadata = SampleMetadata {
            num_sources: k,
            standards: scenario.standards.clone(),
            mixing_mode: scenario.mode,
            snr_db: scenario.snr_db.clone(),
            channel_types,
            impairments,
            powers_db: scenario.powers_db.clone(),
            freq_offsets_hz: scenario.freq_offsets_hz.clone(),
            timing_offsets: scenario.timing_offsets_samples.clone(),
            master_seed: self.master_seed,
            sample_index: index,
            waveforms,
            target_stage: self.config.target_stage,
            noise_mode: self.config.noise_mode,
            mixture_power: mixture.power(),
        };
        Ok(MixtureTrace {
            sample: MixtureSample { mixture, targets, scenario, metadata },
            sources,
            mixture_noise,
        })
    }
}

#[cfg(test)]
mod tests;
