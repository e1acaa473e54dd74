use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use thinfilm::cli::{exit_code, parse_config, run, Subcommand};

#[derive(Parser)]
#[command(
    name = "thinfilm",
    version,
    about = "Thin-film equation simulator and estimate checks"
)]
struct Args {
    /// kernel, ibvp, cauchy, verify or convergence
    subcommand: Subcommand,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `seed` from the config file.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text, args.subcommand) {
        Ok(c) => c,
        Err(errs) => {
            eprintln!("{errs}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    match run(&cfg, &args.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
