//! `dtn-heat` command-line front-end.
//!
//! Exit codes: 0 success, 1 verification mismatch (report still written),
//! 2 usage or input error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{config_to_argv, Cli, Command};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn load_config(path: &std::path::Path) -> Result<Command, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let argv = config_to_argv(&value)?;
    let cli = Cli::try_parse_from(argv).map_err(|e| format!("{}: {}", path.display(), e.render()))?;
    cli.command.ok_or_else(|| "config names no command".to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match (cli.config, cli.command) {
        (Some(path), None) => match load_config(&path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        (None, Some(c)) => c,
        _ => {
            eprintln!("error: give a subcommand or --config FILE (see --help)");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match commands::run(&command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = output::emit(command.out().map(|p| p.as_path()), &outcome.body) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    if outcome.mismatch {
        eprintln!("verification mismatch");
        return ExitCode::from(EXIT_MISMATCH);
    }
    ExitCode::SUCCESS
}
