// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use pentamaser::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pentamaser: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
