use std::process::ExitCode;

use idnc::cli::{self, CliError};

fn main() -> ExitCode {
    let invocation = match cli::parse_args(std::env::args_os()) {
        Ok(inv) => inv,
        Err(CliError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("idnc: {e}");
            return ExitCode::from(2);
        }
    };
    match cli::execute(&invocation) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("idnc: {e}");
            ExitCode::FAILURE
        }
    }
}
