//! Batch front end for the regime model library.

mod args;
mod commands;
mod config;
mod fail;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Probs(a) => commands::probs(a),
        Command::Dynamics(a) => commands::dynamics(a),
        Command::Fit(a) => commands::fit(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Sens(a) => commands::sens(a),
        Command::Synth(a) => commands::synth(a),
        Command::Checkgrad(a) => commands::checkgrad(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("regimelab: {e}");
            ExitCode::from(e.code)
        }
    }
}
