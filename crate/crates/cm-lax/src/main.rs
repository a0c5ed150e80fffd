use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cm_lax::cli::Cli::parse();
    match cm_lax::cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
