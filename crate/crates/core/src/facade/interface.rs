//! Application-side linear algebra interfaces.
//!
//! This file stands in for what a host application would define on its own
//! side of the coupling boundary. It must not mention any backend type;
//! implementations live in `library.rs`.

use std::collections::BTreeMap;

use thiserror::Error;

/// Strided row-major dense vector (or block of vectors) owned by the
/// application.
#[derive(Debug, Clone, PartialEq)]
pub struct AppVector {
    num_rows: usize,
    num_cols: usize,
    stride: usize,
    data: Vec<f64>,
}

impl AppVector {
    pub fn new(num_rows: usize, num_cols: usize) -> Self {
        Self::with_stride(num_rows, num_cols, num_cols)
    }

    pub fn with_stride(num_rows: usize, num_cols: usize, stride: usize) -> Self {
        assert!(stride >= num_cols, "stride smaller than column count");
        AppVector {
            num_rows,
            num_cols,
            stride,
            data: vec![0.0; num_rows * stride],
        }
    }

    /// Single column with the given entries.
    pub fn from_column(values: Vec<f64>) -> Self {
        AppVector {
            num_rows: values.len(),
            num_cols: 1,
            stride: 1,
            data: values,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn total_size(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.num_rows && col < self.num_cols);
        self.data[row * self.stride + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(row < self.num_rows && col < self.num_cols);
        self.data[row * self.stride + col] = value;
    }

    /// Column `col` as a compact vector.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.num_rows).map(|i| self.get(i, col)).collect()
    }
}

/// Application-native sparse matrix: one ordered map per row. Inserting at
/// an existing position accumulates.
#[derive(Debug, Clone, PartialEq)]
pub struct AppMatrix {
    num_rows: usize,
    num_cols: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl AppMatrix {
    pub fn new(num_rows: usize, num_cols: usize) -> Self {
        AppMatrix {
            num_rows,
            num_cols,
            rows: vec![BTreeMap::new(); num_rows],
        }
    }

    pub fn insert(&mut self, row: usize, col: usize, value: f64) {
        assert!(
            row < self.num_rows && col < self.num_cols,
            "entry out of bounds"
        );
        *self.rows[row].entry(col).or_insert(0.0) += value;
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn num_stored(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    /// Every stored entry exactly once, row by row with increasing columns.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(&j, &v)| (i, j, v)))
    }

    /// Application-side product `A * v` for a single column.
    pub fn multiply(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(&j, &a)| a * v[j]).sum())
            .collect()
    }
}

/// The handful of knobs the application exposes for its linear solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// One of `"cg"`, `"bicgstab"`, `"gmres"`, `"lu"`.
    pub algorithm: String,
    pub max_iters: usize,
    pub reduction_factor: f64,
    /// Run GMRES with the LU factorization as preconditioner (`"lu"` only).
    pub wrap_in_gmres: bool,
    /// `"none"` or `"jacobi"`.
    pub preconditioner: String,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            algorithm: "cg".into(),
            max_iters: 1000,
            reduction_factor: 1e-10,
            wrap_in_gmres: false,
            preconditioner: "none".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub initial_residual_norm: f64,
    pub final_residual_norm: f64,
    pub converged: bool,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FacadeError {
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

pub trait AbstractSolver: Send {
    /// Solves with `x` as initial guess; the solution is left in `x`.
    fn solve(&self, b: &AppVector, x: &mut AppVector) -> Result<SolveStats, FacadeError>;

    /// Replaces matrix values, keeping the sparsity pattern. Values are
    /// given row by row with increasing column index.
    fn update_matrix_values(&mut self, values: &[f64]) -> Result<(), FacadeError>;

    fn options(&self) -> &SolverOptions;
}

pub trait AbstractMatrix: Send {
    fn num_rows(&self) -> usize;

    fn num_cols(&self) -> usize;

    /// `x := A * b`.
    fn apply(&self, b: &AppVector, x: &mut AppVector) -> Result<(), FacadeError>;

    fn update_values(&mut self, values: &[f64]) -> Result<(), FacadeError>;
}

/// Level-1 vector operations on application vectors.
pub trait AbstractVectorOps {
    fn scale(&self, v: &mut AppVector, alpha: f64) -> Result<(), FacadeError>;

    /// `v := v + alpha * w`.
    fn add_scaled(&self, v: &mut AppVector, alpha: f64, w: &AppVector) -> Result<(), FacadeError>;

    fn dot(&self, v: &AppVector, w: &AppVector) -> Result<Vec<f64>, FacadeError>;

    fn norm2(&self, v: &AppVector) -> Result<Vec<f64>, FacadeError>;
}
