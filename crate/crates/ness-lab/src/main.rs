//! `ness-lab`: deterministic parameter sweeps over driven-chain steady
//! states, figure generation, and the built-in invariant suite.
//!
//! Exit codes: 0 success, 1 partial per-instance failures, 2 configuration
//! or schema errors.

use clap::{Parser, Subcommand};
use ness_lab::config::{Picture, SweepConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ness-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV datasets plus a run manifest.
    Run {
        /// TOML configuration file; omitted means built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated subset of pictures: stochastic,quantum.
        #[arg(long, value_delimiter = ',')]
        pictures: Option<Vec<String>>,
        /// Offset added to every configured seed.
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
    },
    /// Render SVG figures from a sweep output directory.
    Plot {
        /// Directory holding the sweep CSVs.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run the built-in invariant suite.
    Check,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            workers,
            pictures,
            seed_base,
        } => {
            let mut cfg = match config {
                Some(path) => match SweepConfig::load(&path) {
                    Ok(c) => c,
                    Err(e) => {
                        eprintln!("config error: {e:#}");
                        return ExitCode::from(2);
                    }
                },
                None => SweepConfig::default(),
            };
            if let Some(list) = pictures {
                let parsed: Result<Vec<Picture>, _> =
                    list.iter().map(|s| s.parse::<Picture>()).collect();
                match parsed {
                    Ok(p) => cfg.run.pictures = p,
                    Err(e) => {
                        eprintln!("config error: {e:#}");
                        return ExitCode::from(2);
                    }
                }
            }
            if let Some(w) = workers {
                cfg.run.workers = w;
            }
            if let Err(e) = cfg.validate() {
                eprintln!("config error: {e:#}");
                return ExitCode::from(2);
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.run.out_dir));
            match ness_lab::sweep::run_sweep(&cfg, &out_dir, cfg.run.workers, seed_base) {
                Ok(summary) => {
                    println!(
                        "{} instances solved ({} failed) -> {}",
                        summary.n_instances,
                        summary.n_failed,
                        summary.out_dir.display()
                    );
                    if summary.n_failed > 0 {
                        ExitCode::from(1)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("run failed: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Plot { input } => match ness_lab::plot::emit_plots(&input) {
            Ok(written) => {
                for name in &written {
                    println!("wrote {}", input.join(name).display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("plot failed: {e:#}");
                ExitCode::from(2)
            }
        },
        Command::Check => {
            if ness_lab::check::run() {
                println!("all checks passed");
                ExitCode::SUCCESS
            } else {
                eprintln!("some checks failed");
                ExitCode::from(1)
            }
        }
    }
}
