mod args;
mod commands;
mod error;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Validation("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Failure(e.to_string()))?;
    }
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let format = cli.format;
    match &cli.command {
        Command::Spectrum { model, verify, dump_matrix, dump_format } => {
            commands::spectrum(model, *verify, dump_matrix.as_deref(), *dump_format, format, &mut out)?
        }
        Command::Dos { model, bins } => commands::dos(model, *bins, format, &mut out)?,
        Command::States { model, total_spin, m } => {
            commands::states(model, total_spin.as_deref(), m.as_deref(), format, &mut out)?
        }
        Command::Thermo { model, temps } => commands::thermo(model, temps, format, &mut out)?,
        Command::Weights { model, temperature } => commands::weights(model, *temperature, format, &mut out)?,
        Command::Curie { model, method, etas, t_min, t_max } => {
            commands::curie(model, *method, etas.as_deref(), (*t_min, *t_max), format, &mut out)?
        }
        Command::Verify { model } => commands::verify(model, format, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
