//! Run configuration for the benchmark driver.
//!
//! Settings come from command-line flags and an optional flat `key=value`
//! file whose keys are the long flag names without the leading dashes.
//! Inner dashes are optional and may be written as underscores, so
//! `max-iters`, `max_iters` and `maxiters` are the same key.
//! Flags win over the file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;
use spla_core::facade::{SolverOptions, ALGORITHMS, PRECONDITIONERS};
use spla_core::{Algorithm, ExecutorKind};

use crate::rhs::RhsSpec;
use crate::CliError;

/// Solver names accepted by `--solver`: the facade algorithms plus
/// `gmres_lu`, which sets `wrap_in_gmres` on the LU solver.
pub const SOLVERS: [&str; 5] = ["cg", "bicgstab", "gmres", "lu", "gmres_lu"];

#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "spla",
    about = "Solve a Matrix Market system and print a JSON report"
)]
pub struct Flags {
    /// Executor backend: reference or parallel.
    #[arg(long)]
    pub backend: Option<String>,
    /// Path to a Matrix Market coordinate file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// cg, bicgstab, gmres, lu or gmres_lu.
    #[arg(long)]
    pub solver: Option<String>,
    /// none or jacobi.
    #[arg(long)]
    pub preconditioner: Option<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop once the residual norm drops by this factor.
    #[arg(long)]
    pub reduction_factor: Option<f64>,
    /// GMRES restart length.
    #[arg(long)]
    pub restart: Option<usize>,
    /// ones, random(SEED) or a file of whitespace separated values.
    #[arg(long)]
    pub rhs: Option<String>,
    /// key=value file with defaults for the other flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub backend: String,
    pub matrix_path: PathBuf,
    pub solver: SolverOptions,
    pub restart: usize,
    pub rhs: RhsSpec,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Name of the configured solver as accepted by `--solver`.
    pub fn algorithm_name(&self) -> String {
        if self.solver.wrap_in_gmres {
            format!("gmres_{}", self.solver.algorithm)
        } else {
            self.solver.algorithm.clone()
        }
    }
}

const KEYS: [&str; 9] = [
    "backend",
    "matrix",
    "solver",
    "preconditioner",
    "max-iters",
    "reduction-factor",
    "restart",
    "rhs",
    "output",
];

/// Parses the `key=value` config format. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_config_file(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Parse {
            path: origin.to_owned(),
            line: i + 1,
            message: format!("expected key=value, got {line:?}"),
        })?;
        let key = key.trim();
        let canonical = KEYS
            .iter()
            .find(|k| strip(k) == strip(key))
            .ok_or_else(|| {
                CliError::Config(format!("unknown config key {key:?} at {origin}:{}", i + 1))
            })?;
        map.insert((*canonical).to_owned(), value.trim().to_owned());
    }
    Ok(map)
}

fn strip(key: &str) -> String {
    key.chars().filter(|c| *c != '-' && *c != '_').collect()
}

/// Merges flags over the config file named by `--config`, if any.
pub fn parse_config(flags: Flags) -> Result<RunConfig, CliError> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_config_file(&text, &path.display().to_string())?
        }
        None => BTreeMap::new(),
    };
    resolve(flags, &file)
}

/// Merges `flags` over already parsed `file` values and validates the result.
pub fn resolve(flags: Flags, file: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let get = |key: &str| file.get(key).cloned();
    fn parse_num<T: std::str::FromStr>(key: &str, v: String) -> Result<T, CliError> {
        v.parse()
            .map_err(|_| CliError::Config(format!("bad value {v:?} for {key}")))
    }
    let defaults = SolverOptions::default();

    let backend = flags
        .backend
        .or_else(|| get("backend"))
        .unwrap_or_else(|| "reference".into());
    backend.parse::<ExecutorKind>()?;

    let matrix_path = flags
        .matrix
        .or_else(|| get("matrix").map(PathBuf::from))
        .ok_or_else(|| CliError::Config("no matrix given (--matrix)".into()))?;

    let solver = flags
        .solver
        .or_else(|| get("solver"))
        .unwrap_or(defaults.algorithm);
    if !SOLVERS.contains(&solver.as_str()) {
        return Err(CliError::Config(format!(
            "unknown solver {solver:?}; valid solvers are {SOLVERS:?}"
        )));
    }
    let (algorithm, wrap_in_gmres) = match solver.strip_prefix("gmres_") {
        Some(inner) => (inner.to_owned(), true),
        None => (solver, false),
    };
    debug_assert!(ALGORITHMS.contains(&algorithm.as_str()));

    let preconditioner = flags
        .preconditioner
        .or_else(|| get("preconditioner"))
        .unwrap_or(defaults.preconditioner);
    if !PRECONDITIONERS.contains(&preconditioner.as_str()) {
        return Err(CliError::Config(format!(
            "unknown preconditioner {preconditioner:?}; valid preconditioners are {PRECONDITIONERS:?}"
        )));
    }

    let max_iters = match flags.max_iters {
        Some(v) => v,
        None => get("max-iters").map_or(Ok(defaults.max_iters), |v| parse_num("max-iters", v))?,
    };
    if max_iters < 1 {
        return Err(CliError::Config("max-iters must be at least 1".into()));
    }
    let reduction_factor = match flags.reduction_factor {
        Some(v) => v,
        None => get("reduction-factor").map_or(Ok(defaults.reduction_factor), |v| {
            parse_num("reduction-factor", v)
        })?,
    };
    if reduction_factor.is_nan() || reduction_factor <= 0.0 {
        return Err(CliError::Config("reduction-factor must be positive".into()));
    }
    let restart = match flags.restart {
        Some(v) => v,
        None => {
            get("restart").map_or(Ok(Algorithm::DEFAULT_RESTART), |v| parse_num("restart", v))?
        }
    };
    if restart < 1 {
        return Err(CliError::Config("restart must be at least 1".into()));
    }

    let rhs = flags
        .rhs
        .or_else(|| get("rhs"))
        .unwrap_or_else(|| "ones".into())
        .parse()?;
    let output = flags.output.or_else(|| get("output").map(PathBuf::from));

    Ok(RunConfig {
        backend,
        matrix_path,
        solver: SolverOptions {
            algorithm,
            max_iters,
            reduction_factor,
            wrap_in_gmres,
            preconditioner,
        },
        restart,
        rhs,
        output,
    })
}
