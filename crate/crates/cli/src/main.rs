mod args;
mod commands;
mod data;
mod error;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;

fn main() {
    let code = match Cli::try_parse() {
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            0
        }
        Err(e) => {
            // first paragraph of clap's message, before the usage line
            let message = e.to_string();
            let summary: Vec<&str> = message
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(|l| l.trim().trim_start_matches("error: "))
                .collect();
            let err = error::CliError::Usage(summary.join(" "));
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
        Ok(cli) => match commands::run(cli.command) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("{}", e.to_json());
                e.exit_code()
            }
        },
    };
    std::process::exit(code);
}
