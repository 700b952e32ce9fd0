mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_format, parse_u64, Cli, Command, ConfigFile, Format};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::empty(),
    };
    let format = cfg.pick(cli.format, "format", parse_format)?;
    let seed = cfg.pick(cli.seed, "seed", parse_u64)?.unwrap_or(0);
    let output = match cli.output {
        Some(p) => Some(p),
        None => cfg.pick(None, "output", |s| Ok(std::path::PathBuf::from(s)))?,
    };
    let default_format = match cli.command {
        Command::Portrait(_) | Command::Verify(_) => Format::Json,
        _ => Format::Csv,
    };
    let format = format.unwrap_or(default_format);
    // validate everything before creating the output file
    let mut buf: Vec<u8> = Vec::new();
    let result = match cli.command {
        Command::Field(a) => commands::field::run(a, &cfg, format, &mut buf),
        Command::Portrait(a) => commands::portrait::run(a, &cfg, seed, format, &mut buf),
        Command::Verify(a) => commands::verify::run(a, &cfg, seed, format, &mut buf),
        Command::Analyze(a) => commands::analyze::run(a, &cfg, format, &mut buf),
    };
    if matches!(result, Ok(()) | Err(CliError::Verdict(_))) {
        let mut out = output::open(output.as_deref())?;
        out.write_all(&buf).map_err(error::runtime)?;
        out.flush().map_err(error::runtime)?;
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wallach-flow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
