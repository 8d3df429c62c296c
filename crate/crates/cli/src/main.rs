use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    audiolabel_cli::run(audiolabel_cli::Cli::parse())
}
