use std::io;
use std::process::ExitCode;

use petit::cli::{main_pipeline, DriverConfig};

fn main() -> ExitCode {
    let config = match DriverConfig::from_args(std::env::args_os()) {
        Ok(config) => config,
        Err(e) => e.exit(),
    };
    let stdin = io::stdin();
    let code = main_pipeline(&config, &mut stdin.lock(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
