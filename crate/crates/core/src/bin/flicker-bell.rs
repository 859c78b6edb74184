use std::process::ExitCode;

use flicker_bell::config::{parse_config, ConfigError};
use flicker_bell::report::{emit_report, execute};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cfg = match parse_config(&argv, None) {
        Ok(cfg) => cfg,
        Err(ConfigError::Help(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let results = match execute(&cfg.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let doc = emit_report(&results, cfg.format);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, doc) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{doc}"),
    }
    ExitCode::SUCCESS
}
