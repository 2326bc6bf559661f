mod args;
mod commands;
mod output;
mod tokens;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, Format};
use output::{write_csv, write_json, CliError};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sample(_) => "sample",
        Command::ExactMoments(_) => "exact-moments",
        Command::Constants(_) => "constants",
        Command::Clt(_) => "clt",
        Command::Mesoscopic(_) => "mesoscopic",
        Command::Spacings(_) => "spacings",
        Command::CouplingCheck(_) => "coupling-check",
        Command::Identities(_) => "identities",
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let common = commands::common(&cli.command);
    let pool = match common.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be positive".into())),
        Some(j) => rayon::ThreadPoolBuilder::new().num_threads(j).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let start = Instant::now();
    let report = pool.install(|| commands::run(&cli.command))?;
    let timing_ms = start.elapsed().as_millis() as u64;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match common.format {
        Format::Json => write_json(&mut out, command_name(&cli.command), &report, timing_ms),
        Format::Csv => write_csv(&mut out, &report.table),
    }
    .and_then(|_| out.flush())
    .map_err(|e| CliError::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `permspec {} --help` for usage", command_name(&cli.command));
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
