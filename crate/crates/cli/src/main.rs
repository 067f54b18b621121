use std::process::ExitCode;

use clap::Parser;
use cutoff_lab_cli::config::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    ExitCode::from(cutoff_lab_cli::run(&cli))
}
