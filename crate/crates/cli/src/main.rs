use std::process::ExitCode;

use clap::Parser;
use relay_cli::args::Cli;

fn main() -> ExitCode {
    match relay_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(relay_cli::exit_code(&e))
        }
    }
}
