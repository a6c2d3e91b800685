use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use satqkd::run::{run, Mode, RunConfig, QUICK_SAMPLES};

#[derive(Parser)]
#[command(version, about = "CV-QKD key rates over turbulent Earth-satellite channels")]
struct Cli {
    #[command(subcommand)]
    mode: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key rate at fixed attenuations and fixed source parameters.
    FixedRate(Flags),
    /// Jointly optimized (α², T_S) at fixed attenuations.
    OptimalFixed(Flags),
    /// Ensemble-averaged key rate over a fading channel.
    Fading(Flags),
    /// Parameters optimized for the mean transmissivity, then averaged.
    OptimizeMean(Flags),
    /// Parameters re-optimized for every channel sample.
    OptimizePerSample(Flags),
    /// Histogram of the sampled transmissivity.
    TransmissivityPdf(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML run configuration; the mode's preset is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for all Monte Carlo streams. Required unless the config sets one.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of channel samples per ensemble.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use 2^16 samples per ensemble.
    #[arg(long, conflicts_with = "samples")]
    quick: bool,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

impl Command {
    fn split(self) -> (Mode, Flags) {
        match self {
            Command::FixedRate(f) => (Mode::FixedRate, f),
            Command::OptimalFixed(f) => (Mode::OptimalFixed, f),
            Command::Fading(f) => (Mode::Fading, f),
            Command::OptimizeMean(f) => (Mode::OptimizeMean, f),
            Command::OptimizePerSample(f) => (Mode::OptimizePerSample, f),
            Command::TransmissivityPdf(f) => (Mode::TransmissivityPdf, f),
        }
    }
}

fn build_config(mode: Mode, flags: Flags) -> satqkd::Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let cfg = RunConfig::from_file(path)?;
            if cfg.mode != mode {
                return Err(satqkd::Error::Config {
                    path: "mode".into(),
                    message: format!("config is for `{}`, command is `{mode}`", cfg.mode),
                });
            }
            cfg
        }
        None => {
            let seed = flags.seed.ok_or_else(|| satqkd::Error::Config {
                path: "seed".into(),
                message: "a seed is required (--seed or a config file)".into(),
            })?;
            RunConfig {
                seed,
                ..RunConfig::preset(mode)
            }
        }
    };
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(n) = flags.samples {
        cfg.n_samples = n;
    }
    if flags.quick {
        cfg.n_samples = QUICK_SAMPLES;
    }
    if let Some(out) = flags.out {
        cfg.output_dir = out;
    }
    if let Some(w) = flags.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (mode, flags) = Cli::parse().mode.split();
    match build_config(mode, flags).and_then(|cfg| run(&cfg)) {
        Ok(out) => {
            println!("{}", out.csv_path.display());
            println!("{}", out.manifest_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
