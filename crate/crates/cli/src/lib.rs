//! Command-line front end: TOML inputs, JSON/CSV reports, exit codes
//! 0 (pass), 1 (verification failure), 2 (usage or configuration),
//! 3 (numeric or domain error).

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use clap::Parser;

pub use commands::Command;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "finsler-ricci", version, about = "Finsler curvature, Ricci solitons and Ricci flow families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Runs a parsed command line, writes the report and returns the exit code.
pub fn execute(cli: &Cli) -> i32 {
    let output = cli.command.output();
    let result = commands::run(&cli.command)
        .and_then(|report| report.emit(output.format, output.out.as_deref()).map(|()| report));
    match result {
        Ok(report) => {
            let pass = commands::passed(&report);
            let text = report.summary_text();
            // keep stdout clean for the report itself when it goes there
            if output.out.is_some() {
                print!("{text}");
                println!("{}", if pass { "PASS" } else { "FAIL" });
            } else {
                eprint!("{text}");
                eprintln!("{}", if pass { "PASS" } else { "FAIL" });
            }
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
