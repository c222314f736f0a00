use std::process::ExitCode;

use clap::Parser;
use pcw::commands::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Frontend(pcw_core::lang::FrontendError::InvalidForest(diags)) = &e {
                for d in diags {
                    eprintln!("  {}:{}:{}: {}", d.file, d.line, d.column, d.message);
                }
            }
            ExitCode::FAILURE
        }
    }
}
