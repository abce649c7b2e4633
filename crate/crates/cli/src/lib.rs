//! Command-line driver: experiment tables, profiling, Matrix Market IO and
//! the acceptance suite.

pub mod args;
pub mod commands;
pub mod matrices;
pub mod records;
pub mod verify;

use anyhow::Result;

use args::{Cli, Command};

/// Runs a parsed command. `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::PivotQuality(a) => commands::pivot_quality(a)?,
        Command::Profile(a) => commands::profile(a)?,
        Command::Verify(a) => return commands::verify(a),
        Command::Gen(a) => commands::gen(a)?,
        Command::Factor(a) => commands::factor(a)?,
    }
    Ok(true)
}
