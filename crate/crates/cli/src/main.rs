use std::process::ExitCode;

use clap::Parser;
use difflab_cli::{error_exit_code, execute, init_threads, Cli};

fn main() -> ExitCode {
    // Usage errors are input errors (3); clap's own code 2 would read as
    // "inconclusive".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    init_threads();
    let out = match execute(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("difflab: {e}");
            return ExitCode::from(error_exit_code(&e) as u8);
        }
    };
    let text = out.text(cli.global.normalized);
    match &cli.global.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                eprintln!("difflab: {}: {e}", p.display());
                return ExitCode::from(4);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(out.exit_code() as u8)
}
