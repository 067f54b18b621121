//! Command-line front end for `cutoff-lab`.

pub mod cache;
pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use anyhow::Result;
use cutoff_lab::Error;

use crate::commands::Outcome;
use crate::config::{Cli, CommandKind, ConfigError, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_GENERIC: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_VERDICT: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

/// Exit code for an error that aborted a command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_INPUT;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::StateCapExceeded { .. } | Error::UnderflowRisk { .. } => EXIT_RESOURCE,
                Error::SpecParse(_)
                | Error::Parse { .. }
                | Error::InvalidParameter(_)
                | Error::InvalidMatrix(_)
                | Error::NotGenerating
                | Error::NotSymmetricSet
                | Error::NotIrreducible
                | Error::AsymmetricSupport
                | Error::InvalidTolerance(_)
                | Error::GenerationFailed(_) => EXIT_INPUT,
                _ => EXIT_GENERIC,
            };
        }
    }
    EXIT_GENERIC
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.prepare_out().map_err(|e| ConfigError(format!("{e:#}")))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    pool.install(|| match cfg.command {
        CommandKind::Analyze => commands::cmd_analyze(cfg),
        CommandKind::Verify => commands::cmd_verify(cfg),
        CommandKind::Scan => commands::cmd_scan(cfg),
        CommandKind::Curvature => commands::cmd_curvature(cfg),
        CommandKind::RandomCayley => commands::cmd_random_cayley(cfg),
    })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = RunConfig::from_command(&cli.command).and_then(|cfg| execute(&cfg));
    match result {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::VerdictFailure) => EXIT_VERDICT,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
