use std::process::ExitCode;

use consonance_cli::{main_with_args, EXIT_USAGE};

/// Sizes the global worker pool from `CONSONANCE_THREADS` when set.
fn configure_threads() -> Result<(), String> {
    let Ok(text) = std::env::var("CONSONANCE_THREADS") else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("CONSONANCE_THREADS must be a positive integer, got {text:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    let code = main_with_args(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}
