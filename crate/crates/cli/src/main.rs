use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use fhgmc_cli::{exit_code, run, Args};

fn execute(args: &Args) -> anyhow::Result<()> {
    let config = args.resolve()?;
    let out = run(&config)?;
    match &config.output {
        Some(stem) => out.write_files(Path::new(stem)),
        None => {
            std::io::stdout().lock().write_all(out.csv().as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
