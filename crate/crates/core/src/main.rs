use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use radialflow::cli::{dispatch, exit_code, load_config, SUBCOMMANDS};

/// Radially symmetric compressible flow solvers and inviscid-limit studies.
#[derive(Parser, Debug)]
#[command(name = "radialflow", version)]
struct Args {
    /// One of: solve-ns, solve-euler, solve-bl, outflow-limit, inflow-limit, decay, verify
    subcommand: String,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `out_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for viscosity sweeps (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if !SUBCOMMANDS.contains(&args.subcommand.as_str()) {
        eprintln!(
            "error: unknown subcommand `{}` (expected one of {})",
            args.subcommand,
            SUBCOMMANDS.join(", ")
        );
        return ExitCode::from(2);
    }
    if args.workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    let result = load_config(&args.config).and_then(|mut cfg| {
        if let Some(out) = args.out {
            cfg.out_dir = out;
        }
        dispatch(&args.subcommand, &cfg, args.workers)
    });
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
