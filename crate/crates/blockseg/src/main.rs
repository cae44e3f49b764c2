// SPDX-License-Identifier: MIT OR Apache-2.0

use std::process::ExitCode;

use blockseg::cli::{error_json, run, Cli};
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_json("config", e.to_string().trim_end(), 2));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{}", error_json(e.kind(), &e.to_string(), code));
            ExitCode::from(code as u8)
        }
    }
}
