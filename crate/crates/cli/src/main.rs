mod commands;
mod config;
mod source;

use std::process::ExitCode;

use capfrac::Error;
use clap::Parser;

use commands::Outcome;
use config::{Command, RunConfig};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Io(_) => 1,
        _ => 2,
    }
}

/// `CAPFRAC_THREADS` caps the worker pool; 0 or unset means automatic.
fn init_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("CAPFRAC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::Input(format!(
            "CAPFRAC_THREADS must be a nonnegative integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Io(e.to_string()))
}

fn run(cfg: &RunConfig) -> Result<Outcome, Error> {
    init_threads()?;
    match &cfg.command {
        Command::Apply(a) => commands::apply(a),
        Command::Invert(a) => commands::invert(a, cfg.verbose),
        Command::Riesz(a) => commands::riesz(a),
        Command::InvertRiesz(a) => commands::invert_riesz(a, cfg.verbose),
        Command::Verify(a) => commands::verify(a),
        Command::Oracle(a) => commands::oracle(a),
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(k)) => {
            eprintln!("verification failed: {k} check(s) outside tolerance");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("capfrac: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
