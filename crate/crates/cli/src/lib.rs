//! The `qpea` command-line tool: sweeps, state export, risk tables,
//! baselines and multi-measurement runs, written as CSV or JSON.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use args::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qpea_risk::Error),
    #[error("cannot read {path}: {source}", path = .0.display(), source = .1)]
    Input(PathBuf, std::io::Error),
    #[error("cannot write {path}: {source}", path = .0.display(), source = .1)]
    Output(PathBuf, std::io::Error),
}

impl CliError {
    /// 2 for bad arguments or I/O, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                qpea_risk::Error::Numeric(_) | qpea_risk::Error::DegenerateEvidence { .. },
            ) => 3,
            _ => 2,
        }
    }
}

/// Machine-readable run header: tool and library versions plus the full
/// resolved configuration.
pub fn header(cfg: &RunConfig) -> String {
    serde_json::json!({
        "tool": "qpea",
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": qpea_risk::VERSION,
        "config": cfg,
    })
    .to_string()
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand_args(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    eprintln!("{}", header(&cfg));
    match dispatch(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cfg: &RunConfig) -> Result<(), CliError> {
    let outcome = commands::execute(&cfg.command)?;
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    let out = cfg.command.output();
    let dest = output::destination(out.output.as_deref(), cfg.command.name(), out.format);
    let body = outcome.table.render(out.format);
    output::emit(&body, outcome.table.rows.len(), dest.as_deref())
}
