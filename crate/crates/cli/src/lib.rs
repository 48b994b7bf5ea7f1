//! Library behind the `skew` and `quadric` binaries. Each command returns a
//! [`Report`] and an exit code so that tests can drive it without a process.

use std::time::Instant;

use thiserror::Error;

pub mod config;
pub mod export;
pub mod quadric;
pub mod report;
pub mod skew;

pub use config::{CommonArgs, Format, PrimaryTol, RunConfig};
pub use report::{Report, Timings};

/// Exit code for a completed run, including a refuted loop.
pub const EXIT_OK: u8 = 0;
/// Exit code when a budget ran out or a check could not decide.
pub const EXIT_INCONCLUSIVE: u8 = 1;
/// Exit code for malformed or invalid input.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        EXIT_INPUT
    }
}

impl From<skewloop_core::io::IoError> for CliError {
    fn from(e: skewloop_core::io::IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// What a command produced before it is wrapped into a [`Report`].
pub struct Outcome {
    pub results: serde_json::Value,
    pub exit: u8,
}

/// Runs `f`, timing it, and wraps the outcome with the command line and
/// configuration.
pub fn run_timed(
    command: Vec<String>,
    config: &RunConfig,
    f: impl FnOnce() -> Result<Outcome, CliError>,
) -> Result<(Report, u8), CliError> {
    let start = Instant::now();
    let out = f()?;
    let report = Report {
        command,
        config: config.clone(),
        results: out.results,
        timings: Timings {
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    };
    Ok((report, out.exit))
}

/// Sets the size of the global worker pool once per process.
pub fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers.filter(|&n| n > 0) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Prints an error the way both binaries do and returns its exit code.
pub fn report_error(e: &CliError) -> u8 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Writes what a command produced and returns the process exit code.
pub fn finish(result: Result<skew::Emission, CliError>) -> u8 {
    let em = match result {
        Ok(em) => em,
        Err(e) => return report_error(&e),
    };
    let text = em.report.to_json();
    let written = match (&em.stdout_payload, &em.report_path) {
        (Some(payload), _) => {
            print!("{payload}");
            Ok(())
        }
        (None, Some(path)) => report::write_text(path, &text),
        (None, None) => {
            println!("{text}");
            Ok(())
        }
    };
    match written {
        Ok(()) => em.exit,
        Err(e) => report_error(&e),
    }
}
