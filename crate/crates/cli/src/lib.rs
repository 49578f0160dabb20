//! Command-line front end for the `kdep` library.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod record;

use std::io::Write;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};

/// Runs one command, writing its standard-output text to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let text = match &cli.command {
        Command::Test(a) => commands::cmd_test(a)?,
        Command::Sensitivity(a) => commands::cmd_sensitivity(a)?,
        Command::Rank(a) => commands::cmd_rank(a)?,
        Command::Causal(a) => commands::cmd_causal(a)?,
        Command::Bench(a) => commands::cmd_bench(a)?,
        Command::SynthPairs(a) => commands::cmd_synth_pairs(a)?,
    };
    if !text.is_empty() {
        writeln!(out, "{text}")?;
    }
    Ok(())
}
