use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = ruinbound_cli::Cli::parse();
    ExitCode::from(ruinbound_cli::execute(&cli))
}
