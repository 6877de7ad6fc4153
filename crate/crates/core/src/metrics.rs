//! SI-SINR, permutation-invariant scoring, stratified reports and signal
//! characterization statistics.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::spectral::{papr_db, stft_frames, welch, Psd};
use crate::dsp::window::hann_periodic;
use crate::error::{param, Error, Result};
use crate::iq::IqBuffer;
use crate::mixer::{MixingMode, SampleMetadata};
use crate::rng::{SeedContext, StreamTag};

/// Value reported for an exact reconstruction.
pub const SI_SINR_CAP_DB: f64 = 300.0;

fn centered(x: &[Complex64]) -> Vec<Complex64> {
    let mean = x.iter().sum::<Complex64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// Scale-invariant SINR of `est` against `reference` in dB, after removing
/// both means. The projection uses the conjugated inner product, and the
/// result is clamped to +-300 dB.
pub fn si_sinr(est: &IqBuffer, reference: &IqBuffer) -> Result<f64> {
    si_sinr_slices(&est.samples, &reference.samples)
}

pub fn si_sinr_slices(est: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if est.len() != reference.len() || est.len() < 2 {
        return param(format!(
            "SI-SINR needs equal lengths of at least 2, got {} and {}",
            est.len(),
            reference.len()
        ));
    }
    let e = centered(est);
    let r = centered(reference);
    let r_energy: f64 = r.iter().map(|v| v.norm_sqr()).sum();
    if r_energy == 0.0 {
        return Err(Error::MetricUndefined("reference is zero after mean removal".into()));
    }
    let alpha = e.iter().zip(&r).map(|(a, b)| a * b.conj()).sum::<Complex64>() / r_energy;
    let target = alpha.norm_sqr() * r_energy;
    let residual: f64 = e.iter().zip(&r).map(|(a, b)| (a - alpha * b).norm_sqr()).sum();
    let db = 10.0 * (target / residual).log10();
    Ok(if db.is_nan() { -SI_SINR_CAP_DB } else { db.clamp(-SI_SINR_CAP_DB, SI_SINR_CAP_DB) })
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitResult {
    pub mean_db: f64,
    /// `permutation[j]` is the estimate assigned to reference `j`.
    pub permutation: Vec<usize>,
    pub per_source_db: Vec<f64>,
}

/// Best mean SI-SINR over all assignments of estimates to references.
/// Ties go to the lexicographically smallest permutation.
pub fn pit_si_sinr(ests: &[IqBuffer], refs: &[IqBuffer]) -> Result<PitResult> {
    let k = refs.len();
    if ests.len() != k || !(1..=crate::MAX_SOURCES).contains(&k) {
        return param(format!("PIT needs 1..=4 estimates per reference, got {} and {k}", ests.len()));
    }
    let mut scores = vec![vec![0.0; k]; k];
    for (i, e) in ests.iter().enumerate() {
        for (j, r) in refs.iter().enumerate() {
            scores[i][j] = si_sinr(e, r)?;
        }
    }
    let mut best: Option<PitResult> = None;
    for perm in permutations(k) {
        let per_source: Vec<f64> = perm.iter().enumerate().map(|(j, &i)| scores[i][j]).collect();
        let mean = per_source.iter().sum::<f64>() / k as f64;
        if best.as_ref().map_or(true, |b| mean > b.mean_db) {
            best = Some(PitResult {
                mean_db: mean,
                permutation: perm,
                per_source_db: per_source,
            });
        }
    }
    Ok(best.expect("at least one permutation"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SnrBin {
    #[serde(rename = "0-10")]
    Low,
    #[serde(rename = "10-20")]
    Mid,
    #[serde(rename = "20-30")]
    High,
}

impl SnrBin {
    /// Left-closed bins; values outside [0, 30] go to the nearest end bin.
    pub fn from_db(snr_db: f64) -> Self {
        if snr_db < 10.0 {
            SnrBin::Low
        } else if snr_db < 20.0 {
            SnrBin::Mid
        } else {
            SnrBin::High
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SnrBin::Low => "0-10",
            SnrBin::Mid => "10-20",
            SnrBin::High => "20-30",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sample_index: u64,
    pub method: String,
    pub pi_si_sinr_db: f64,
    pub permutation: Vec<usize>,
    pub per_source_si_sinr_db: Vec<f64>,
    pub mode: MixingMode,
    pub num_sources: usize,
    pub snr_bin: SnrBin,
    pub mixture_snr_db: f64,
}

impl EvalRecord {
    pub fn new(method: &str, pit: PitResult, meta: &SampleMetadata) -> Self {
        let snr = meta.mixture_snr_db();
        Self {
            sample_index: meta.sample_index,
            method: method.to_string(),
            pi_si_sinr_db: pit.mean_db,
            permutation: pit.permutation,
            per_source_si_sinr_db: pit.per_source_db,
            mode: meta.mixing_mode,
            num_sources: meta.num_sources,
            snr_bin: SnrBin::from_db(snr),
            mixture_snr_db: snr,
        }
    }
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn records_to_csv(records: &[EvalRecord]) -> String {
    let header = [
        "sample_index",
        "method",
        "num_sources",
        "mode",
        "snr_bin",
        "mixture_snr_db",
        "pi_si_sinr_db",
        "permutation",
        "per_source_si_sinr_db",
    ]
    .map(String::from)
    .to_vec();
    csv_string(std::iter::once(header).chain(records.iter().map(|r| {
        vec![
            r.sample_index.to_string(),
            r.method.clone(),
            r.num_sources.to_string(),
            r.mode.to_string(),
            r.snr_bin.label().to_string(),
            r.mixture_snr_db.to_string(),
            r.pi_si_sinr_db.to_string(),
            join(&r.permutation, " "),
            join(&r.per_source_si_sinr_db, " "),
        ]
    })))
}

/// Grouping dimension of a report cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Overall,
    NumSources,
    Mode,
    SnrBin,
    CoChannelNumSources,
    CoChannelSnrBin,
}

impl Axis {
    pub const ALL: [Axis; 6] = [
        Axis::Overall,
        Axis::NumSources,
        Axis::Mode,
        Axis::SnrBin,
        Axis::CoChannelNumSources,
        Axis::CoChannelSnrBin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Overall => "overall",
            Axis::NumSources => "num_sources",
            Axis::Mode => "mode",
            Axis::SnrBin => "snr_bin",
            Axis::CoChannelNumSources => "co_channel_num_sources",
            Axis::CoChannelSnrBin => "co_channel_snr_bin",
        }
    }

    fn key(self, r: &EvalRecord) -> Option<String> {
        let co = r.mode == MixingMode::CoChannel;
        match self {
            Axis::Overall => Some("all".into()),
            Axis::NumSources => Some(r.num_sources.to_string()),
            Axis::Mode => Some(r.mode.to_string()),
            Axis::SnrBin => Some(r.snr_bin.label().into()),
            Axis::CoChannelNumSources => co.then(|| r.num_sources.to_string()),
            Axis::CoChannelSnrBin => co.then(|| r.snr_bin.label().into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub method: String,
    pub axis: Axis,
    pub key: String,
    pub count: usize,
    pub mean_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub cells: Vec<ReportCell>,
}

/// Mean PI-SI-SINR per method, grouped along every [`Axis`].
pub fn stratified_report(records: &[EvalRecord]) -> Result<Report> {
    if records.is_empty() {
        return param("cannot report on zero records");
    }
    let mut groups: BTreeMap<(String, Axis, String), (usize, f64)> = BTreeMap::new();
    for r in records {
        for axis in Axis::ALL {
            if let Some(key) = axis.key(r) {
                let cell = groups.entry((r.method.clone(), axis, key)).or_insert((0, 0.0));
                cell.0 += 1;
                cell.1 += r.pi_si_sinr_db;
            }
        }
    }
    let cells = groups
        .into_iter()
        .map(|((method, axis, key), (count, sum))| ReportCell {
            method,
            axis,
            key,
            count,
            mean_db: sum / count as f64,
        })
        .collect();
    Ok(Report { cells })
}

impl Report {
    pub fn cell(&self, method: &str, axis: Axis, key: &str) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.axis == axis && c.key == key)
    }

    pub fn axis<'a>(&'a self, method: &'a str, axis: Axis) -> impl Iterator<Item = &'a ReportCell> + 'a {
        self.cells
            .iter()
            .filter(move |c| c.method == method && c.axis == axis)
    }

    pub fn to_csv(&self) -> String {
        let header = ["method", "axis", "key", "count", "mean_pi_si_sinr_db"].map(String::from).to_vec();
        csv_string(std::iter::once(header).chain(self.cells.iter().map(|c| {
            vec![
                c.method.clone(),
                c.axis.name().to_string(),
                c.key.clone(),
                c.count.to_string(),
                format!("{:.4}", c.mean_db),
            ]
        })))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut methods: Vec<&str> = self.cells.iter().map(|c| c.method.as_str()).collect();
        methods.dedup();
        for method in methods {
            writeln!(f, "method: {method}")?;
            for axis in Axis::ALL {
                let cells: Vec<&ReportCell> = self.axis(method, axis).collect();
                if cells.is_empty() {
                    continue;
                }
                writeln!(f, "  {}", axis.name())?;
                for c in cells {
                    writeln!(f, "    {:<18} {:>10.2} dB   n={}", c.key, c.mean_db, c.count)?;
                }
            }
        }
        Ok(())
    }
}

pub const MIN_CHARACTERIZE_LEN: usize = 4096;
pub const PSD_NFFT: usize = 4096;
pub const ENVELOPE_BINS: usize = 256;
/// Upper edge of the envelope histogram, in units of the RMS amplitude.
pub const ENVELOPE_MAX_RMS: f64 = 6.0;
pub const SPECTROGRAM_NFFT: usize = 1024;
pub const SPECTROGRAM_HOP: usize = 256;

/// Envelope density of `|x| / rms(x)`; samples past the last edge land in
/// the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub times_s: Vec<f64>,
    pub freqs_hz: Vec<f64>,
    /// `[frame][bin]`, bins in ascending frequency.
    pub power_db: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    pub papr_db: f64,
    pub mean_power: f64,
    pub psd: Psd,
    pub occupied_bw_hz: f64,
    pub envelope: Histogram,
    pub spectrogram: Spectrogram,
}

fn envelope_histogram(x: &[Complex64]) -> Histogram {
    let rms = crate::iq::mean_power(x).sqrt();
    let width = ENVELOPE_MAX_RMS / ENVELOPE_BINS as f64;
    let mut counts = vec![0usize; ENVELOPE_BINS];
    for s in x {
        let a = if rms > 0.0 { s.norm() / rms } else { 0.0 };
        counts[((a / width) as usize).min(ENVELOPE_BINS - 1)] += 1;
    }
    Histogram {
        edges: (0..=ENVELOPE_BINS).map(|i| i as f64 * width).collect(),
        density: counts.iter().map(|&c| c as f64 / (x.len() as f64 * width)).collect(),
    }
}

fn spectrogram(x: &IqBuffer) -> Spectrogram {
    let window = hann_periodic(SPECTROGRAM_NFFT);
    let energy: f64 = window.iter().map(|w| w * w).sum();
    let n = SPECTROGRAM_NFFT;
    let half = n / 2;
    let frames = stft_frames(&x.samples, n, SPECTROGRAM_HOP, &window);
    Spectrogram {
        times_s: (0..frames.len())
            .map(|f| (f * SPECTROGRAM_HOP) as f64 / x.sample_rate_hz)
            .collect(),
        freqs_hz: (0..n)
            .map(|j| (j as f64 - half as f64) * x.sample_rate_hz / n as f64)
            .collect(),
        power_db: frames
            .iter()
            .map(|row| {
                (0..n)
                    .map(|j| 10.0 * (row[(j + half) % n].norm_sqr() / energy).max(1e-30).log10())
                    .collect()
            })
            .collect(),
    }
}

/// PAPR, Welch PSD (4096 points, 50% overlap, Hann), 99% occupied
/// bandwidth, envelope histogram and a 1024/256 spectrogram.
pub fn characterize(x: &IqBuffer) -> Result<Characterization> {
    if x.len() < MIN_CHARACTERIZE_LEN {
        return param(format!(
            "characterization needs at least {MIN_CHARACTERIZE_LEN} samples, got {}",
            x.len()
        ));
    }
    let psd = welch(&x.samples, x.sample_rate_hz, PSD_NFFT, PSD_NFFT / 2);
    Ok(Characterization {
        papr_db: papr_db(&x.samples),
        mean_power: x.power(),
        occupied_bw_hz: psd.occupied_bandwidth(0.99),
        psd,
        envelope: envelope_histogram(&x.samples),
        spectrogram: spectrogram(x),
    })
}

/// Averages PSDs, envelope densities and PAPR over several signals of one
/// kind. The spectrogram is taken from the first item.
pub fn aggregate(items: &[Characterization]) -> Option<Characterization> {
    let first = items.first()?;
    let n = items.len() as f64;
    let mut out = first.clone();
    for (i, d) in out.psd.density.iter_mut().enumerate() {
        *d = items.iter().map(|c| c.psd.density[i]).sum::<f64>() / n;
    }
    for (i, d) in out.envelope.density.iter_mut().enumerate() {
        *d = items.iter().map(|c| c.envelope.density[i]).sum::<f64>() / n;
    }
    out.papr_db = items.iter().map(|c| c.papr_db).sum::<f64>() / n;
    out.mean_power = items.iter().map(|c| c.mean_power).sum::<f64>() / n;
    out.occupied_bw_hz = out.psd.occupied_bandwidth(0.99);
    Some(out)
}

impl Characterization {
    pub fn summary_csv(&self) -> String {
        csv_string([
            vec!["papr_db".into(), "mean_power".into(), "occupied_bw_99_hz".into()],
            vec![
                self.papr_db.to_string(),
                self.mean_power.to_string(),
                self.occupied_bw_hz.to_string(),
            ],
        ])
    }

    pub fn psd_csv(&self) -> String {
        csv_string(
            std::iter::once(vec!["freq_hz".into(), "psd_db_per_hz".into()]).chain(
                self.psd.freqs_hz.iter().zip(&self.psd.density).map(|(f, d)| {
                    vec![f.to_string(), (10.0 * d.max(1e-30).log10()).to_string()]
                }),
            ),
        )
    }

    pub fn envelope_csv(&self) -> String {
        csv_string(
            std::iter::once(vec!["bin_low".into(), "bin_high".into(), "density".into()]).chain(
                self.envelope.density.iter().enumerate().map(|(i, d)| {
                    vec![
                        self.envelope.edges[i].to_string(),
                        self.envelope.edges[i + 1].to_string(),
                        d.to_string(),
                    ]
                }),
            ),
        )
    }

    /// One row per frame: time, then power in dB per frequency column.
    pub fn spectrogram_csv(&self) -> String {
        let s = &self.spectrogram;
        let header = std::iter::once("time_s".to_string())
            .chain(s.freqs_hz.iter().map(|f| f.to_string()))
            .collect();
        csv_string(std::iter::once(header).chain(s.power_db.iter().zip(&s.times_s).map(|(row, t)| {
            std::iter::once(t.to_string())
                .chain(row.iter().map(|v| format!("{v:.3}")))
                .collect()
        })))
    }
}

pub const EVAL_CROP_LEN: usize = 7680;
pub const EVAL_CROP_SEED: u64 = 42;

/// Start of the evaluation crop of `sample_index`, uniform over all
/// positions where a `crop_len` window fits.
pub fn eval_crop_offset(sample_index: u64, total_len: usize, crop_len: usize, seed: u64) -> Result<usize> {
    if crop_len == 0 || crop_len > total_len {
        return param(format!("crop of {crop_len} does not fit in {total_len} samples"));
    }
    let mut rng = SeedContext::new(seed, sample_index, StreamTag::Scenario)
        .with_lane(u64::MAX)
        .stream();
    Ok(rng.gen_range(0..=total_len - crop_len))
}

pub fn crop(x: &IqBuffer, offset: usize, len: usize) -> Result<IqBuffer> {
    if offset + len > x.len() {
        return param(format!("crop [{offset}, {}) exceeds {} samples", offset + len, x.len()));
    }
    Ok(x.with_samples(x.samples[offset..offset + len].to_vec()))
}
