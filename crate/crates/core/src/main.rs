use clap::Parser;
use cmo_bench::cli::{exit_code, load_config, run, Command, EXIT_INVALID, EXIT_OK};
use std::path::PathBuf;
use std::process::ExitCode;

/// Runs one experiment described by a JSON config and writes its JSON/CSV artifacts.
#[derive(Parser)]
#[command(version)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's worker count.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    if let Some(w) = args.workers {
        config.workers = Some(w);
    }
    let dir = args.out.unwrap_or_else(|| config.output.clone());
    match run(args.command, &config, &dir) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::from(EXIT_OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
