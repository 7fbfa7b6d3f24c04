//! Benchmark harness and demo applications for `spla-core`.
//!
//! - [`mtx`] reads the coordinate subset of Matrix Market.
//! - [`config`] merges command-line flags with a `key=value` config file.
//! - [`rhs`] builds right-hand sides, including a seeded LCG stream.
//! - [`bench`] runs one solve and produces a flat JSON report.
//! - [`demo`] holds the implicit Euler, heat equation and batched kinetics
//!   demos.

pub mod bench;
pub mod config;
pub mod demo;
pub mod mtx;
pub mod rhs;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("unsupported matrix market format: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Facade(#[from] spla_core::facade::FacadeError),
    #[error(transparent)]
    Core(#[from] spla_core::Error),
}
