use std::process::ExitCode;

use cdc_cli::{configure_threads, execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads().and_then(|()| execute(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cdc-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
