use std::process::ExitCode;

use clap::Parser;
use spinwave_gate::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("swgate: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
