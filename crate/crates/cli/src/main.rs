use std::process::ExitCode;

use clap::Parser;
use qanalytic_cli::commands::{emit, run, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match emit(&report, cli.command.common().json.as_ref()) {
        Ok(Some(text)) => print!("{text}"),
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    }
    if matches!(cli.command, Command::Verify { .. }) && !report.all_pass() {
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
