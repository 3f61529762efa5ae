use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sphere_nodal_cli::{render, worker_count, Cli, CliError};

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    if let Some(k) = worker_count(cli.flags.workers)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {k} workers: {e}")))?;
    }
    let config = cli.run_config()?;
    let text = render(&config)?;
    match &config.output_path {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sphere-nodal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
