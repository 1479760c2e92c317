use std::io;
use std::process::ExitCode;

use clap::Parser;
use mkdv_shock::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, &mut io::stdout().lock(), &mut io::stderr().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mkdv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
