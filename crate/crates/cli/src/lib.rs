//! Library behind the `l1exact` binary: argument types, the four commands
//! and their output formats.

pub mod args;
pub mod commands;
pub mod fuzzing;
pub mod output;
pub mod ranges;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command, THREADS_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BREACH: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_QUADRATURE: i32 = 3;
pub const EXIT_ROOT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("root finding failure: {0}")]
    RootFinding(String),
    #[error("{0}")]
    Breach(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) | CliError::Io(_) => EXIT_BAD_INPUT,
            CliError::Quadrature(_) => EXIT_QUADRATURE,
            CliError::RootFinding(_) => EXIT_ROOT,
            CliError::Breach(_) => EXIT_BREACH,
        }
    }
}

impl From<ranges::RangeError> for CliError {
    fn from(e: ranges::RangeError) -> Self {
        CliError::BadInput(e.to_string())
    }
}

/// Thread count from the flag, then the environment, `None` meaning rayon's
/// default.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::BadInput(format!("{THREADS_ENV}={s:?} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::BadInput("thread count must be at least 1".into()));
    }
    Ok(n)
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = resolve_threads(threads)? {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| CliError::BadInput(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs one parsed command and writes its output.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let (mut record, out, breach) = match cli.command {
        Command::Exact(a) => (commands::cmd_exact(&a)?, a.output, None),
        Command::Simulate(a) => (in_pool(a.threads, || commands::cmd_simulate(&a))??, a.output, None),
        Command::Asym(a) => (commands::cmd_asym(&a)?, a.output, None),
        Command::Verify(a) => {
            let (record, failed) = in_pool(a.threads, || verify::cmd_verify(&a))??;
            let breach = (failed > 0).then(|| format!("{failed} check(s) failed"));
            (record, a.output, breach)
        }
    };
    if out.timing {
        record.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    commands::write_output(&record, &out)?;
    match breach {
        Some(msg) => Err(CliError::Breach(msg)),
        None => Ok(()),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "l1exact: {e}");
            e.exit_code()
        }
    }
}
