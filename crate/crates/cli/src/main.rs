use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use prevsweep::commands;
use prevsweep::config::{RunConfig, ThresholdModeSetting, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "prevsweep",
    version,
    about = "Prevalence-sweep evaluation of binary classifiers: metrics, \
             simulation, model ranking, and variance analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdModeArg {
    /// Evaluate confusion-matrix metrics at the 0.5 cutoff only.
    Cutoff,
    /// Evaluate at every score threshold as well.
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Compute all evaluation metrics for a predictions CSV (columns:
    /// score,label).
    Metrics {
        /// Predictions CSV path.
        predictions: PathBuf,
        /// Decision threshold for the confusion-matrix metrics.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// F-beta weights, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 2.0])]
        betas: Vec<f64>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the prevalence sweep and write all report tables.
    Sweep {
        /// TOML config file; defaults apply for anything not set.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the threshold mode.
        #[arg(long, value_enum)]
        threshold_mode: Option<ThresholdModeArg>,
        /// Override the dataset CSV path.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Generate a synthetic two-class dataset CSV.
    Synth {
        /// Number of rows.
        #[arg(long)]
        n: usize,
        /// Number of features.
        #[arg(long)]
        features: usize,
        /// Fraction of positive rows.
        #[arg(long)]
        prevalence: f64,
        /// Class-mean separation per coordinate.
        #[arg(long)]
        separation: f64,
        /// Seed.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print the default configuration as TOML.
    PrintDefaults,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Metrics { predictions, threshold, betas, out } => {
            let report = commands::run_metrics(&predictions, threshold, &betas, out.as_deref())?;
            print!("{report}");
        }
        Command::Sweep { config, seed, out, threshold_mode, dataset } => {
            let mut run_config: RunConfig = commands::load_config(config.as_deref())?;
            if let Some(seed) = seed {
                run_config.seed = seed;
            }
            if let Some(out) = out {
                run_config.out_dir = out;
            }
            if let Some(mode) = threshold_mode {
                run_config.threshold_mode = match mode {
                    ThresholdModeArg::Cutoff => ThresholdModeSetting::Cutoff,
                    ThresholdModeArg::Full => ThresholdModeSetting::Full,
                };
            }
            if let Some(dataset) = dataset {
                run_config.dataset = Some(dataset);
            }
            let artifacts = commands::run_sweep_command(&run_config)?;
            println!(
                "evaluated {} iterations; wrote {} to {}",
                artifacts.iterations,
                artifacts.files.join(", "),
                artifacts.out_dir.display()
            );
        }
        Command::Synth { n, features, prevalence, separation, seed, out } => {
            commands::run_synth(n, features, prevalence, separation, seed, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Config { action: ConfigAction::PrintDefaults } => {
            print!("{}", commands::print_defaults());
        }
    }
    Ok(())
}
