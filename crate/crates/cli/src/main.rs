//! `udmis`: command-line front end for the UD-MIS benchmark toolkit.
//!
//! Every subcommand writes UTF-8 JSON or CSV to stdout (or `--out`).
//! Exit codes: 0 success, 1 runtime failure, 2 usage error,
//! 3 budget or feasibility failure.

mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::Cli;

fn main() -> ExitCode {
    udmis_core::exec::init_threads_from_env();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
