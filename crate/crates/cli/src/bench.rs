//! One benchmark run: load, solve with a zero initial guess, report.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use spla_core::facade::{AbstractSolver, AppMatrix, AppVector, LibrarySolver};
use spla_core::Executor;

use crate::config::{parse_config, Flags, RunConfig};
use crate::mtx::read_matrix_market;
use crate::CliError;

/// Flat JSON report. Field names are the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchReport {
    /// File stem of the matrix path.
    pub matrix: String,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub backend: String,
    pub algorithm: String,
    pub iterations: usize,
    pub initial_residual_norm: f64,
    pub final_residual_norm: f64,
    pub converged: bool,
    /// Time spent in the solve call only.
    pub wall_time_ms: f64,
}

impl BenchReport {
    pub const KEYS: [&'static str; 11] = [
        "matrix",
        "rows",
        "cols",
        "nnz",
        "backend",
        "algorithm",
        "iterations",
        "initial_residual_norm",
        "final_residual_norm",
        "converged",
        "wall_time_ms",
    ];

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

pub fn run_benchmark(cfg: &RunConfig) -> Result<BenchReport, CliError> {
    let md = read_matrix_market(&cfg.matrix_path)?;
    let size = md.size();
    let mut app = AppMatrix::new(size.rows, size.cols);
    for t in md.nonzeros() {
        app.insert(t.row, t.col, t.value);
    }
    let b = AppVector::from_column(cfg.rhs.generate(size.rows)?);
    let mut x = AppVector::new(size.cols, 1);

    let exec = Executor::from_name(&cfg.backend, None)?;
    let solver = LibrarySolver::with_restart(&exec, &app, cfg.solver.clone(), cfg.restart)?;
    let start = Instant::now();
    let stats = solver.solve(&b, &mut x)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    Ok(BenchReport {
        matrix: cfg
            .matrix_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        rows: size.rows,
        cols: size.cols,
        nnz: app.num_stored(),
        backend: cfg.backend.clone(),
        algorithm: cfg.algorithm_name(),
        iterations: stats.iterations,
        initial_residual_norm: stats.initial_residual_norm,
        final_residual_norm: stats.final_residual_norm,
        converged: stats.converged,
        wall_time_ms,
    })
}

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Drives a full run and returns the process exit code. The report goes to
/// `--output` or `out`; diagnostics go to `err`. Nothing is written to the
/// report destination when the run fails.
pub fn run_cli(flags: Flags, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = parse_config(flags).and_then(|cfg| {
        let report = run_benchmark(&cfg)?;
        let json = report.to_json();
        match &cfg.output {
            Some(path) => {
                std::fs::write(path, format!("{json}\n")).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?
            }
            None => writeln!(out, "{json}").map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })?,
        }
        Ok(report)
    });
    match result {
        Ok(report) if report.converged => EXIT_CONVERGED,
        Ok(report) => {
            let _ = writeln!(
                err,
                "spla: not converged after {} iterations (residual {:e})",
                report.iterations, report.final_residual_norm
            );
            EXIT_NOT_CONVERGED
        }
        Err(e) => {
            let _ = writeln!(err, "spla: {e}");
            EXIT_ERROR
        }
    }
}
