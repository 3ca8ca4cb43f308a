use std::process::ExitCode;

use clap::Parser;
use flatconv_core::Error;

use flatconv_cli::args::{Cli, Command};
use flatconv_cli::commands;

const EXIT_USAGE: u8 = 2;

fn configure_threads() {
    let threads = std::env::var("FLATCONV_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(t) = threads.filter(|&t| t > 0) {
        // Only fails if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match &cli.command {
        Command::Construct(a) => commands::run_construct(a),
        Command::Sweep(a) => commands::run_sweep(a),
        Command::Verify(a) => commands::run_verify(a),
        Command::Metrics(a) => commands::run_metrics(a),
        Command::Tails(a) => commands::run_tails(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(
                e.downcast_ref::<Error>(),
                Some(Error::InvalidParams(_) | Error::InvalidGrid(_) | Error::TooManyPoints { .. })
            );
            ExitCode::from(if usage { EXIT_USAGE } else { 1 })
        }
    }
}
