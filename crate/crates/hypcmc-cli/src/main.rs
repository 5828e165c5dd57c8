//! `hypcmc`: configuration-driven solver and verification harness for CMC
//! Killing graphs in the hyperbolic half space.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 verification failure.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Mode, RunConfig};
use run::Failure;

#[derive(Parser)]
#[command(name = "hypcmc", about = "CMC Killing-graph solver in the hyperbolic half space")]
struct Args {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the mode from the configuration file.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("configuration error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let cfg: RunConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(1);
        }
    };
    match run::run(&cfg, args.mode) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(match f {
                Failure::Config(_) => 1,
                Failure::Solver(_) => 2,
                Failure::Verification(_) => 3,
            })
        }
    }
}
