mod args;
mod commands;
mod error;
mod matrix_io;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use error::CliError;
use report::{render_json, render_text, CommandEcho, Report, Tolerances, SCHEMA_VERSION};

fn run(cli: &Cli) -> Result<(Report, u8), CliError> {
    let g = &cli.global;
    let tol = g.tolerance();
    tol.validate()?;
    if g.qmax == 0 {
        return Err(CliError::Input("--qmax must be at least 1".into()));
    }
    let (name, run) = match &cli.command {
        Command::Classify { input } => ("classify", commands::classify(input, g)?),
        Command::Compare(args) => ("compare", commands::compare(args, g)?),
        Command::Enum2 { relation } => ("enum2", commands::enum2((*relation).into(), g)?),
        Command::Selftest => ("selftest", commands::selftest(g)?),
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool: "linflow",
        version: env!("CARGO_PKG_VERSION"),
        command: CommandEcho { name, args: std::env::args().skip(1).collect() },
        tolerances: Tolerances::new(&tol, g.qmax),
        inputs: run.inputs,
        result: run.outcome,
    };
    Ok((report, run.exit_code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, code)) => {
            let text = match cli.global.format {
                Format::Json => render_json(&report),
                Format::Text => render_text(&report),
            };
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("linflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
