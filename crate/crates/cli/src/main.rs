#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use error::CliError;

/// Scattering by finite periodic chains of 1D potential cells.
#[derive(Debug, Parser)]
#[command(name = "chainscat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Single-cell amplitudes over a k-grid
    Cell,
    /// Chain amplitudes: per-N at --k, or per-k at --N
    Chain,
    /// Band classification over a k-grid
    Bands,
    /// Transmission time-delay and traversal time versus N
    Hartman,
    /// Time-delays over a k-grid, optionally against a displaced copy
    Delay,
    /// Wave-packet averaged transmission versus N
    Packet,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Cell => "cell",
            Command::Chain => "chain",
            Command::Bands => "bands",
            Command::Hartman => "hartman",
            Command::Delay => "delay",
            Command::Packet => "packet",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = ExperimentConfig::resolve(&cli.flags)?;
    let report = match cli.command {
        Command::Cell => commands::cell(&cfg),
        Command::Chain => commands::chain(&cfg),
        Command::Bands => commands::bands(&cfg),
        Command::Hartman => commands::hartman(&cfg),
        Command::Delay => commands::delay(&cfg),
        Command::Packet => commands::packet(&cfg),
    }?;
    let sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    report.table.write(&mut sink, cli.command.name(), &cfg)?;
    sink.flush()?;
    if let Some(first) = report.violations.first() {
        let more = report.violations.len() - 1;
        let suffix = if more > 0 { format!(" (and {more} more)") } else { String::new() };
        return Err(CliError::Numerical(format!("{first}{suffix}")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chainscat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
