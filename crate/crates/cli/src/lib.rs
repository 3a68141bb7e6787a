//! The `overlapq` command-line front end.
//!
//! Exit codes: 0 consistent, 1 I/O failure, 2 only known (ledgered)
//! discrepancies reproduced, 3 unexpected inconsistency, 64 bad usage.

pub mod args;
mod commands;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use args::{Cli, Command, RunConfig, UsageError, SEED_ENV};
use report::{write_report, Outcome};

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Model(overlapq::Error),
    Io(std::io::Error),
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<overlapq::Error> for CliError {
    fn from(e: overlapq::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use overlapq::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Model(e) => match e {
                E::InternalInconsistency { .. } | E::QuadratureNonConvergence { .. } => 3,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

/// Parse, run and report. Returns the process exit code.
///
/// With `--out` the report goes to the file and a human summary to `stdout`;
/// otherwise the report goes to `stdout` and the summary to `stderr`.
pub fn run<I, T>(argv: I, env_seed: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{rendered}") } else { write!(stdout, "{rendered}") };
            return code;
        }
    };
    match execute(cli.command, env_seed, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

type Handler = fn(&RunConfig) -> Result<Outcome, CliError>;

fn execute(command: Command, env_seed: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (cfg, outcome): (RunConfig, Handler) = match command {
        Command::Analytic(q) => (RunConfig::resolve(&q, None, None, false, env_seed)?, commands::analytic),
        Command::Simulate(a) => (RunConfig::resolve(&a.query, None, None, a.moments, env_seed)?, commands::simulate),
        Command::Compare(q) => (RunConfig::resolve(&q, None, None, false, env_seed)?, commands::compare),
        Command::Tables(a) => (RunConfig::resolve(&a.query, None, a.table, false, env_seed)?, commands::tables),
        Command::Conjecture(a) => (RunConfig::resolve(&a.query, a.xs, None, false, env_seed)?, commands::conjecture),
    };
    let outcome = outcome(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_report(&outcome, cfg.format, &mut file)?;
            file.flush()?;
            write!(stdout, "{}", outcome.summary)?;
        }
        None => {
            write_report(&outcome, cfg.format, stdout)?;
            write!(stderr, "{}", outcome.summary)?;
        }
    }
    Ok(outcome.status.exit_code())
}

/// Entry point used by the binary.
pub fn main_with_env() -> i32 {
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(std::env::args_os(), env_seed, &mut out, &mut err)
}
