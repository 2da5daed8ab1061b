use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use divaudit_cli::{run, write_atomic, Cli, RunConfig, EXIT_ERROR};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };

    if let Some(dir) = &config.output {
        for artifact in &outcome.artifacts {
            if let Err(e) = write_atomic(dir, artifact) {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_ERROR as u8);
            }
        }
    }
    print!("{}", outcome.stdout);
    let _ = std::io::stdout().flush();
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.exit_code as u8)
}
