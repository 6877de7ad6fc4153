use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rfss_baselines::{EvalOptions, Method};
use rfss_cli::characterize::{characterize_selection, write_csvs, Selection};
use rfss_cli::config::{companion_path, WORKERS_ENV};
use rfss_cli::evaluate::{evaluate, EvalMethod};
use rfss_cli::generate::generate;
use rfss_cli::{inspect, RunConfig};
use rfss_core::metrics::{records_to_csv, EVAL_CROP_LEN, EVAL_CROP_SEED};
use rfss_core::mixer::{MixingMode, NoiseMode, TargetStage};
use rfss_core::waveforms::StandardId;
use rfss_io::Backend;

#[derive(Parser)]
#[command(
    name = "rfss",
    version,
    about = "Multi-standard RF source separation corpora and baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mixture corpus and its single-source companion.
    Generate(GenerateArgs),
    /// Write PAPR, PSD, envelope and spectrogram CSVs.
    Characterize(CharacterizeArgs),
    /// Score a separator on the test split.
    Evaluate(EvaluateArgs),
    /// Print corpus layout, or the metadata of one row.
    Inspect {
        path: PathBuf,
        #[arg(long)]
        index: Option<usize>,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long)]
    mode: Option<MixingMode>,
    #[arg(long)]
    target_stage: Option<TargetStage>,
    #[arg(long)]
    noise_mode: Option<NoiseMode>,
    /// Samples per signal (default 122880).
    #[arg(long)]
    sample_len: Option<usize>,
    /// Companion samples per standard (default: corpus size / 100, rounded up).
    #[arg(long)]
    single_per_standard: Option<usize>,
}

impl GenerateArgs {
    fn config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(seed => master_seed, size => corpus_size, out => out_path, backend => backend,
             workers => workers, target_stage => target_stage, noise_mode => noise_mode,
             sample_len => sample_len);
        if self.mode.is_some() {
            cfg.mode_filter = self.mode;
        }
        if self.single_per_standard.is_some() {
            cfg.single_per_standard = self.single_per_standard;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("selection").required(true).args(["index", "standard"]))]
struct CharacterizeArgs {
    corpus: PathBuf,
    /// Corpus row whose mixture is characterized.
    #[arg(long)]
    index: Option<usize>,
    /// Standard whose clean companion sources are characterized and averaged.
    #[arg(long)]
    standard: Option<StandardId>,
    /// Companion corpus (default: derived from the corpus path).
    #[arg(long)]
    single: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    corpus: PathBuf,
    /// ica, nmf or external.
    #[arg(long)]
    method: String,
    /// Estimates container for --method external.
    #[arg(long)]
    estimates: Option<PathBuf>,
    /// Test samples per source count.
    #[arg(long, default_value_t = 150)]
    n: usize,
    #[arg(long)]
    mode: Option<MixingMode>,
    /// Score a seeded 7680-sample crop instead of the full signal.
    #[arg(long)]
    crop: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Per-sample records CSV.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Stratified report CSV.
    #[arg(long)]
    report_csv: Option<PathBuf>,
}

/// Prints to stdout, ignoring a closed pipe.
fn out(text: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let cfg = args.config()?;
    let cancel = Arc::new(AtomicBool::new(false));
    let flag = cancel.clone();
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst))
        .context("installing interrupt handler")?;
    let summary = generate(&cfg, &cancel)?;
    out(summary);
    Ok(())
}

fn run_characterize(args: CharacterizeArgs) -> Result<()> {
    let (sel, path) = match (args.index, args.standard) {
        (Some(i), _) => (Selection::Index(i), args.corpus),
        (None, Some(st)) => (
            Selection::Standard(st),
            args.single.unwrap_or_else(|| companion_path(&args.corpus)),
        ),
        (None, None) => unreachable!("clap enforces a selection"),
    };
    let c = characterize_selection(&path, sel)?;
    out(format_args!("PAPR: {:.2} dB", c.papr_db));
    out(format_args!(
        "99% occupied bandwidth: {:.1} kHz",
        c.occupied_bw_hz / 1e3
    ));
    for p in write_csvs(&c, &args.out_dir, &sel.label())? {
        out(format_args!("wrote {}", p.display()));
    }
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let method = match args.method.to_ascii_lowercase().as_str() {
        "external" => EvalMethod::External(
            args.estimates
                .context("--method external needs --estimates")?,
        ),
        other => EvalMethod::Baseline(other.parse::<Method>().map_err(anyhow::Error::msg)?),
    };
    let mut opts = EvalOptions::new(Method::Ica, args.n);
    opts.mode = args.mode;
    opts.seed = args.seed;
    opts.crop = args.crop.then_some((EVAL_CROP_LEN, EVAL_CROP_SEED));
    let workers = args
        .workers
        .unwrap_or_else(rfss_cli::config::default_workers)
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    let (records, report) = pool.install(|| evaluate(&args.corpus, &method, &opts))?;
    out(format_args!("{}", report.to_string().trim_end()));
    if let Some(p) = &args.records {
        std::fs::write(p, records_to_csv(&records))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &args.report_csv {
        std::fs::write(p, report.to_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Characterize(a) => run_characterize(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Inspect { path, index } => inspect(&path, index).map(out).map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
