//! `qmoments`: coefficients, nodes, checks and figures from the command line.
//!
//! Exit status: 0 when everything passes, 1 when a check fails, 2 for usage
//! errors, 3 when the precision needed could not be reached.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{emit, run, Failure};

fn output_args(command: &Command) -> &args::OutputArgs {
    match command {
        Command::Coeffs(a) | Command::Nodes(a) | Command::Figure(a) => &a.out,
        Command::Verify(a) => &a.out,
        Command::Cubature(a) => &a.out,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(&cli.command).and_then(|r| {
        emit(output_args(&cli.command), &r.text)?;
        Ok(r.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let kind = match f {
                Failure::Usage(_) => "error",
                Failure::Precision(_) => "precision failure",
            };
            eprintln!("qmoments: {kind}: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
