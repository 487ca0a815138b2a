//! Config-driven batch runs of the `jacobi-curves` analyses.
//!
//! `jacobi <command> --config <path> [--out <dir>] [--seed <int>] [--parallel]` writes
//! `<command>.csv`, `<command>.json` and `provenance.json` into the output directory.

pub mod config;
pub mod output;
pub mod run;
pub mod system;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use sha2::{Digest, Sha256};

pub use config::{Command, RunConfig};
pub use output::{RunResult, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed config, or failed semantic checks.
    Validation(Vec<String>),
    /// The library refused or failed on valid input.
    Numerical(jacobi_curves::Error),
    /// Output could not be written.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "Validation",
            CliError::Io(_) => "Io",
            CliError::Numerical(e) => error_kind(e),
        }
    }

    /// Machine-readable record for stderr.
    pub fn record(&self) -> String {
        let messages = match self {
            CliError::Validation(d) => d.clone(),
            other => vec![other.to_string()],
        };
        json!({ "error": self.kind(), "exit_code": self.exit_code(), "messages": messages }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(d) => write!(f, "invalid config: {}", d.join("; ")),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "cannot write output: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<jacobi_curves::Error> for CliError {
    fn from(e: jacobi_curves::Error) -> Self {
        CliError::Numerical(e)
    }
}

pub fn error_kind(e: &jacobi_curves::Error) -> &'static str {
    use jacobi_curves::Error::*;
    match e {
        InvalidInput(_) => "InvalidInput",
        RankDeficient => "RankDeficient",
        NotLagrangian(_) => "NotLagrangian",
        NotTransversal(_) => "NotTransversal",
        NotInChart => "NotInChart",
        SearchExhausted(_) => "SearchExhausted",
        ChartFailure(_) => "ChartFailure",
        NotRegular(_) => "NotRegular",
        NotMonotone => "NotMonotone",
        EndpointOnTrain(_) => "EndpointOnTrain",
        SubdivisionFailure(_) => "SubdivisionFailure",
        DegenerateEndpoint(_) => "DegenerateEndpoint",
        IndexMismatch { .. } => "IndexMismatch",
        Parity(_) => "Parity",
        RankDrop => "RankDrop",
        DimensionDefect { .. } => "DimensionDefect",
        EndpointDegenerate(_) => "EndpointDegenerate",
        NewtonFailure(_) => "NewtonFailure",
        BlowUp(_) => "BlowUp",
        TangentFiber => "TangentFiber",
        TrivialQuotient => "TrivialQuotient",
        ReductionRefused(_) => "ReductionRefused",
    }
}

/// Reads and parses a config file; failures are validation errors.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(vec![format!("cannot read {}: {e}", path.display())]))?;
    RunConfig::from_toml(&text).map_err(|e| CliError::Validation(vec![format!("cannot parse config: {e}")]))
}

pub fn config_hash(cfg: &RunConfig) -> String {
    Sha256::digest(cfg.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Validates and runs `command` without touching the filesystem.
pub fn run(cfg: &RunConfig, command: Command, parallel: bool) -> Result<RunResult, CliError> {
    let diagnostics = cfg.validate(command);
    if !diagnostics.is_empty() {
        return Err(CliError::Validation(diagnostics));
    }
    Ok(run::execute(cfg, command, parallel)?)
}

/// Runs `command` and writes its artifacts to `out`. Nothing is written on failure.
pub fn run_to_dir(cfg: &RunConfig, command: Command, out: &Path, parallel: bool) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let result = run(cfg, command, parallel)?;
    let hash = config_hash(cfg);
    let provenance = json!({
        "command": command.name(),
        "config_sha256": hash,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "parallel": parallel,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    let files = vec![
        (format!("{command}.csv"), result.series.to_csv()),
        (format!("{command}.json"), result.to_json(&hash)),
        ("provenance.json".to_string(), format!("{}\n", serde_json::to_string_pretty(&provenance).expect("json"))),
    ];
    output::write_atomically(out, &files).map_err(CliError::Io)
}
