//! `eegband` batch frontend.
//!
//! Exit codes: 0 success, 1 pipeline failure, 2 usage or I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eegband::classify::TrainConfig;
use eegband::pipeline::{FeatureSelection, PipelineConfig};

#[derive(Debug, Parser)]
#[command(name = "eegband", version, about = "EEG band-limiting, db4 sub-band decomposition, features and classification")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Sampling rate of the input files, Hz.
    #[arg(long, global = true, default_value_t = 173.61)]
    sample_rate: f64,

    /// Low-pass cutoff applied before decomposition, Hz.
    #[arg(long, global = true, default_value_t = 60.0)]
    cutoff_hz: f64,

    /// FIR length (odd).
    #[arg(long, global = true, default_value_t = 101)]
    taps: usize,

    /// Wavelet decomposition depth.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    levels: u32,

    /// Feature source: delta, theta, alpha, beta, gamma, whole, raw or all.
    #[arg(long, global = true, default_value = "delta")]
    band: String,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[arg(long, global = true, default_value_t = 10)]
    hidden_dim: usize,

    #[arg(long, global = true, default_value_t = 0.05)]
    learning_rate: f64,

    #[arg(long, global = true, default_value_t = 2000)]
    epochs: usize,

    /// Fraction of each class used for training.
    #[arg(long, global = true, default_value_t = 0.5)]
    split_ratio: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Band-limit and decompose one segment; write sub-band reconstructions,
    /// coefficients and a metadata JSON.
    Decompose { input: PathBuf },

    /// Write log-log periodogram CSVs for one or two segments.
    Periodogram {
        #[arg(required = true, num_args = 1..=2)]
        inputs: Vec<PathBuf>,

        /// Fit a power-law slope and record it in the metadata.
        #[arg(long)]
        slope: bool,

        #[arg(long, default_value_t = 1.0)]
        slope_min_hz: f64,

        #[arg(long, default_value_t = 60.0)]
        slope_max_hz: f64,
    },

    /// Compute the feature matrix for a `path,label` manifest.
    Features {
        manifest: PathBuf,

        /// Print published reference rows beside recomputed Z038/S001 features.
        #[arg(long)]
        compare_reference: bool,
    },

    /// Split, train the classifier and evaluate on the held-out part.
    TrainEval {
        /// Manifest of the corpus; omit with --synthetic.
        #[arg(required_unless_present = "synthetic")]
        manifest: Option<PathBuf>,

        /// Use a generated surrogate corpus instead of files.
        #[arg(long, conflicts_with = "manifest")]
        synthetic: bool,

        /// Segments per class for --synthetic.
        #[arg(long, default_value_t = 100)]
        per_class: usize,
    },

    /// Write a surrogate two-class corpus and its manifest to --out-dir.
    Synthetic {
        #[arg(long, default_value_t = 100)]
        per_class: usize,

        #[arg(long, default_value_t = 4097)]
        length: usize,
    },
}

impl GlobalArgs {
    fn pipeline_config(&self) -> Result<PipelineConfig, commands::CliError> {
        let band: FeatureSelection = self
            .band
            .parse()
            .map_err(|e: eegband::Error| commands::CliError::Usage(e.to_string()))?;
        let cfg = PipelineConfig {
            sample_rate: self.sample_rate,
            cutoff_hz: self.cutoff_hz,
            fir_taps: self.taps,
            levels: self.levels as usize,
            band,
            train: TrainConfig {
                hidden_dim: self.hidden_dim,
                learning_rate: self.learning_rate,
                epochs: self.epochs,
                seed: self.seed,
                split_ratio: self.split_ratio,
            },
        };
        cfg.validate_signal_path()
            .map_err(|e| commands::CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = cli
        .global
        .pipeline_config()
        .and_then(|cfg| commands::run(&cli.command, &cfg, &cli.global.out_dir));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
