use std::process::ExitCode;

use clap::Parser;

use motzkin_cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("MOTZKIN_THREADS").ok();
    let outcome = configure_threads(threads.as_deref()).and_then(|()| run(&cli));
    match outcome {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
