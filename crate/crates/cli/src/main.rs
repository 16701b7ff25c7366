use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match dstrust_cli::run(dstrust_cli::Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dstrust: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
