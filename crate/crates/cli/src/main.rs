//! `tactile`: generate synthetic e-skin datasets, train and evaluate the
//! estimators, and run inference on recorded frames.

mod commands;
mod config;
mod error;
mod fsio;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Single,
    Two,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Two => "two",
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tactile",
    version,
    about = "Stretchable e-skin simulation, training and evaluation"
)]
struct Cli {
    /// TOML run configuration. Defaults to ./tactile.toml when present.
    #[arg(long, global = true, env = "TACTILE_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModeArg {
    #[arg(long, value_enum, default_value_t = Mode::Single)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a protocol dataset and print its sample count.
    Generate {
        #[command(flatten)]
        mode: ModeArg,
        /// Repetitions per protocol cell.
        #[arg(long)]
        reps: Option<u32>,
        /// Protocol seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset CSV; the metadata goes next to it as .meta.toml.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train on a dataset and write a model bundle.
    Train {
        #[command(flatten)]
        mode: ModeArg,
        dataset: Option<PathBuf>,
        /// Pipeline seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate on a dataset and write the metrics report.
    Eval {
        #[command(flatten)]
        mode: ModeArg,
        dataset: Option<PathBuf>,
        /// Number of folds.
        #[arg(long)]
        k: Option<usize>,
        /// Fold assignment seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        emit_heatmaps: bool,
    },
    /// Estimate contacts for every frame of a CSV file.
    Infer {
        /// Expected bundle mode; taken from the bundle when omitted.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        model: PathBuf,
        frames: PathBuf,
        /// Estimates CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a saved metrics report, optionally re-emitting its matrices.
    Report {
        #[command(flatten)]
        mode: ModeArg,
        /// metrics.json; defaults to the configured report directory.
        report: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        emit_heatmaps: bool,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Generate {
            mode,
            reps,
            seed,
            out,
        } => {
            let mode = mode.mode;
            if let Some(r) = reps {
                cfg.single.reps_per_cell = r;
                cfg.two.reps = r;
            }
            if let Some(s) = seed {
                cfg.single.seed = s;
                cfg.two.seed = s;
            }
            cfg.validate()?;
            let n = commands::generate(&cfg, mode, out)?;
            println!("{n}");
        }
        Command::Train {
            mode,
            dataset,
            seed,
            out,
        } => {
            if let Some(s) = seed {
                cfg.pipeline.seed = s;
            }
            cfg.validate()?;
            let data = dataset.unwrap_or_else(|| cfg.paths.dataset(mode.mode));
            let path = commands::train(&cfg, mode.mode, &data, out)?;
            eprintln!("model written to {}", path.display());
        }
        Command::Eval {
            mode,
            dataset,
            k,
            seed,
            out,
            emit_heatmaps,
        } => {
            if let Some(k) = k {
                if k < 2 {
                    return Err(CliError::Usage(format!("--k must be at least 2, got {k}")));
                }
                cfg.eval.k_single = k;
                cfg.eval.k_two = k;
            }
            if let Some(s) = seed {
                cfg.eval.seed = s;
            }
            cfg.validate()?;
            let data = dataset.unwrap_or_else(|| cfg.paths.dataset(mode.mode));
            let report = commands::eval(&cfg, mode.mode, &data, out, emit_heatmaps)?;
            println!("{}", commands::headline(&report));
        }
        Command::Infer {
            mode,
            model,
            frames,
            out,
        } => {
            let n = commands::infer(mode, &model, &frames, out.clone())?;
            if out.is_some() {
                eprintln!("{n} frames");
            }
        }
        Command::Report {
            mode,
            report,
            out,
            emit_heatmaps,
        } => {
            let path = report.unwrap_or_else(|| cfg.paths.reports(mode.mode).join("metrics.json"));
            print!("{}", commands::report(&path, out, emit_heatmaps)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
