mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (result, output) = match &cli.command {
        Command::Zeros(a) => (commands::zeros(a), &a.common.output),
        Command::Count(a) => (commands::count(a), &a.common.output),
        Command::Bounds(a) => (commands::bounds(a), &a.common.output),
        Command::Geometry(a) => (commands::geometry(a), &a.common.output),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(f) => return fail(&f),
    };
    let written = match output {
        Some(path) => std::fs::write(path, &outcome.body),
        None => std::io::stdout().lock().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        return fail(&Failure::Numeric(format!("writing output: {e}")));
    }
    ExitCode::from(outcome.code)
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("error: {}", f.message());
    ExitCode::from(f.code())
}
