//! `ntcp`: NTCP calculators, dose inversion, lattice field simulation,
//! variance estimation and Monte Carlo campaigns.
//!
//! Exit status is 0 on success, 1 when the arguments are outside a
//! function's domain, and 2 for usage, file and config errors.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            eprintln!("ntcp: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("ntcp: error: {msg}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
