//! `grc`: bounds calculator, repair simulator, degree optimizer and the
//! reproduction self-test.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "grc", version, about = "Generalized regenerating codes on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cut-set, IP and adversarial bounds for one parameter set.
    Bounds(commands::BoundsArgs),
    /// Symbol-level repair on a graph with bandwidth accounting.
    Simulate(commands::SimulateArgs),
    /// Optimal repair degree per failed node, or the random-graph experiment.
    Optimize(commands::OptimizeArgs),
    /// Repair of a systematic node with altered helpers on the fig5 network.
    AdversarialDemo(commands::AdversarialArgs),
    /// Runs every reproduction check.
    Selftest(commands::SelftestArgs),
}

/// Failures that map to distinct exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit code 1.
    Invalid(anyhow::Error),
    /// A reproduced number or repair did not match: exit code 2.
    Mismatch(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Invalid(e)
    }
}

impl From<grc::Error> for Failure {
    fn from(e: grc::Error) -> Self {
        Failure::Invalid(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Bounds(a) => commands::bounds(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::AdversarialDemo(a) => commands::adversarial(a),
        Command::Selftest(a) => commands::selftest(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("reproduction failed: {msg}");
            ExitCode::from(2)
        }
    }
}
