use std::io::Write;
use std::process::ExitCode;

use wqed_cli::{emit, metadata_text, parse_config, run_sweep, ConfigError, Format};

const CONFIG_ERROR: u8 = 2;
const NUMERICAL_FAILURE: u8 = 3;
const IO_FAILURE: u8 = 1;

fn main() -> ExitCode {
    let config = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        // prints help/version with status 0 and usage errors with status 2
        Err(ConfigError::Usage(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let table = match run_sweep(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: numerical failure at {e}");
            return ExitCode::from(NUMERICAL_FAILURE);
        }
    };
    let bytes = emit(&table, config.format);
    let written = match &config.out {
        Some(path) => std::fs::write(path, &bytes).and_then(|_| {
            if config.format == Format::Csv {
                let mut meta = path.clone().into_os_string();
                meta.push(".meta");
                std::fs::write(meta, metadata_text(&table))
            } else {
                Ok(())
            }
        }),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(IO_FAILURE);
    }
    ExitCode::SUCCESS
}
