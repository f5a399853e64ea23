//! `uqimp`: generate data, train models, and compute entropy- and
//! likelihood-based importance and curves from the command line.

mod args;
mod commands;
mod error;
mod inputs;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Generate(a) => commands::generate::run(g, a),
        Command::Train(a) => commands::train::run(g, a),
        Command::Pfi(a) => commands::pfi::run(g, a),
        Command::Curves(a) => commands::curves::run(g, a),
        Command::FeaturePredictability(a) => commands::predictability::run(g, a),
        Command::Report => commands::report::run(g),
    }
}

/// Collapses a message onto one line.
fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            let msg: Vec<&str> = text
                .lines()
                .filter(|l| !l.trim().is_empty() && !l.starts_with("For more information"))
                .collect();
            let msg = one_line(&msg.join(" "));
            eprintln!("error[usage]: {}", msg.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(if matches!(e, CliError::Usage(_)) { 2 } else { 1 })
        }
    }
}
