//! `warplab CONFIG --command CMD`: runs one computation described by a JSON
//! run configuration and writes CSV/JSON outputs plus `meta.json`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "warplab",
    version,
    about = "Volume growth, geodesics and rescaled samples of warped manifolds"
)]
struct Cli {
    /// Path to the JSON run configuration.
    config: PathBuf,
    #[arg(long, value_enum)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    BuildWarp,
    VolumeCurve,
    GrowthOrders,
    SlopeScales,
    Profile,
    Capacity,
    ConeSample,
    DiamRatio,
    Validate,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Domain(warplab::Error),
    Validation(String),
}

impl From<warplab::Error> for Failure {
    fn from(e: warplab::Error) -> Self {
        match e {
            warplab::Error::Parse(msg) => Failure::Config(msg),
            other => Failure::Domain(other),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Domain(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Domain(e) => write!(f, "{e}"),
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("WARPLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!(
            "WARPLAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_threads()
        .and_then(|()| config::RunConfig::load(&cli.config))
        .and_then(|cfg| run::execute(cli.command, &cfg));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("warplab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
