// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

use clap::error::ErrorKind;
use clap::Parser;

use spinforge::cli::{execute, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = execute(&cli);
    if outcome.result.status == spinforge::cli::Status::Error && !cli.json {
        eprintln!("{}", outcome.stdout);
    } else {
        println!("{}", outcome.stdout);
    }
    std::process::exit(outcome.result.exit_code());
}
