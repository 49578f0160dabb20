use std::process::ExitCode;

use clap::Parser;
use kdep_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let first = e.to_string();
            eprintln!("kdep: {}", first.lines().next().unwrap_or(""));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
