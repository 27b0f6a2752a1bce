mod args;
mod commands;
mod manifest;

use clap::Parser;

use args::{Cli, Command};
use wlbayes::Error as CoreError;

const EXIT_USAGE: i32 = 1;
const EXIT_DATA: i32 = 2;
const EXIT_SAMPLER: i32 = 3;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with successful exit
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(EXIT_USAGE);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };

    let result = match &cli.command {
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Fit(args) => commands::cmd_fit(args),
        Command::Loo(args) => commands::cmd_loo(args),
        Command::Compare(args) => commands::cmd_compare(args),
    };

    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code_for(&err));
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::InvalidConfig(_)) => EXIT_USAGE,
        Some(
            CoreError::InitializationFailed { .. }
            | CoreError::ChainDiverged { .. }
            | CoreError::FoldFailure { .. },
        ) => EXIT_SAMPLER,
        Some(_) => EXIT_DATA,
        None => EXIT_DATA,
    }
}
