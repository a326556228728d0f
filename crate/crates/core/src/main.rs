use std::process::ExitCode;

use clap::Parser;
use greedy_recovery::cli::{csv_on_stdout, run, RunConfig};

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(summary) => {
            if csv_on_stdout(&cfg) {
                eprintln!("{}", summary.line());
            } else {
                println!("{}", summary.line());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
