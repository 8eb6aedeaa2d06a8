use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toda_kdv::golden;
use toda_kdv::runner::{self, RunConfig};

/// Spectral verification suites for periodic Toda lattices in the continuum limit.
#[derive(Parser)]
#[command(name = "toda-kdv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites selected by a TOML config and write CSV artifacts and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated suites, overriding the config.
        #[arg(long)]
        suites: Option<String>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Record or compare golden copies of a run's CSV artifacts.
    Golden {
        #[command(subcommand)]
        action: GoldenAction,
    },
}

#[derive(Subcommand)]
enum GoldenAction {
    Check {
        #[arg(long)]
        dir: PathBuf,
        /// Directory holding the run output.
        #[arg(long, default_value = "toda-kdv-out")]
        from: PathBuf,
    },
    Update {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "toda-kdv-out")]
        from: PathBuf,
    },
}

const FAILED: u8 = 1;
const ERROR: u8 = 2;

fn run(config: PathBuf, suites: Option<String>, out: Option<PathBuf>) -> toda_kdv::Result<bool> {
    let mut cfg = RunConfig::load(&config)?;
    if let Some(s) = suites {
        cfg.suites = runner::parse_suites(&s)?;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    cfg.validate()?;
    let summary = runner::run(&cfg)?;
    for r in &summary.results {
        println!("{:<4} {:<13} {}", if r.pass { "ok" } else { "FAIL" }, r.suite.name(), r.profile_id);
    }
    println!("summary written to {}", cfg.output_dir.join("summary.json").display());
    Ok(summary.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, suites, out } => run(config, suites, out),
        Command::Golden { action: GoldenAction::Update { dir, from } } => golden::update(&dir, &from).map(|n| {
            println!("recorded {n} golden files in {}", dir.display());
            true
        }),
        Command::Golden { action: GoldenAction::Check { dir, from } } => golden::check(&dir, &from).map(|r| {
            for m in &r.mismatches {
                println!("{m}");
            }
            println!("{} files checked, {} mismatches", r.files_checked, r.mismatches.len());
            r.pass()
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(ERROR)
        }
    }
}
