//! Interface implementations backed by this library.
//!
//! Matrices are converted once, on construction, by triplet extraction.
//! Vectors are never copied: every call wraps the application's storage in
//! zero-copy `Dense` views, which works because both sides use the same
//! strided row-major layout.

use crate::container::{Dim, MatrixData};
use crate::error::Error;
use crate::executor::Executor;
use crate::instrument;
use crate::linop::{Csr, Dense, LinOp, SharedCsr};
use crate::solver::{Algorithm, PreconditionerKind, Solver, SolverFactory, StoppingCriterion};

use super::interface::{
    AbstractMatrix, AbstractSolver, AbstractVectorOps, AppMatrix, AppVector, FacadeError,
    SolveStats, SolverOptions,
};

pub const ALGORITHMS: [&str; 4] = ["cg", "bicgstab", "gmres", "lu"];
pub const PRECONDITIONERS: [&str; 2] = ["none", "jacobi"];

impl From<Error> for FacadeError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension { .. } => FacadeError::Dimension(e.to_string()),
            Error::InvalidArgument(m) => FacadeError::InvalidArgument(m),
            Error::Configuration(m) => FacadeError::Configuration(m),
            other => FacadeError::Solver(other.to_string()),
        }
    }
}

/// Translates application options into a solver factory.
pub fn factory_for(options: &SolverOptions, restart: usize) -> Result<SolverFactory, FacadeError> {
    let algorithm = match (options.algorithm.as_str(), options.wrap_in_gmres) {
        ("lu", true) => Algorithm::GmresLu { restart },
        ("lu", false) => Algorithm::Lu,
        (_, true) => {
            return Err(FacadeError::Configuration(
                "wrap_in_gmres is only valid with algorithm \"lu\"".into(),
            ))
        }
        ("cg", _) => Algorithm::Cg,
        ("bicgstab", _) => Algorithm::BiCgStab,
        ("gmres", _) => Algorithm::Gmres { restart },
        (other, _) => {
            return Err(FacadeError::Configuration(format!(
                "unknown algorithm {other:?}; valid algorithms are {ALGORITHMS:?}"
            )))
        }
    };
    let preconditioner = match options.preconditioner.as_str() {
        "none" => None,
        "jacobi" => Some(PreconditionerKind::Jacobi),
        other => {
            return Err(FacadeError::Configuration(format!(
                "unknown preconditioner {other:?}; valid preconditioners are {PRECONDITIONERS:?}"
            )))
        }
    };
    if options.max_iters == 0 {
        return Err(FacadeError::Configuration(
            "max_iters must be at least 1".into(),
        ));
    }
    Ok(SolverFactory::new(algorithm)
        .with_criteria([
            StoppingCriterion::Iteration(options.max_iters),
            StoppingCriterion::ResidualNorm(options.reduction_factor),
        ])
        .with_preconditioner(preconditioner))
}

/// Copies an application matrix into a backend CSR matrix.
pub fn convert_matrix(exec: &Executor, matrix: &AppMatrix) -> Result<Csr, FacadeError> {
    let mut md = MatrixData::new(Dim::new(matrix.num_rows(), matrix.num_cols()));
    for (row, col, value) in matrix.triplets() {
        md.add(row, col, value)?;
    }
    let csr = Csr::read(exec, &md)?;
    instrument::record_matrix_conversion();
    Ok(csr)
}

fn const_view<'a>(exec: &Executor, v: &'a AppVector) -> Result<Dense<'a>, FacadeError> {
    let size = Dim::new(v.num_rows(), v.num_cols());
    Ok(Dense::const_view(exec, size, v.data(), v.stride())?)
}

fn view<'a>(exec: &Executor, v: &'a mut AppVector) -> Result<Dense<'a>, FacadeError> {
    let size = Dim::new(v.num_rows(), v.num_cols());
    let stride = v.stride();
    Ok(Dense::view(exec, size, v.data_mut(), stride)?)
}

fn check_vectors(n: usize, b: &AppVector, x: &AppVector) -> Result<(), FacadeError> {
    if b.num_rows() != n || x.num_rows() != n || b.num_cols() != x.num_cols() || b.num_cols() == 0 {
        return Err(FacadeError::Dimension(format!(
            "operator is {n}x{n}, b is {}x{}, x is {}x{}",
            b.num_rows(),
            b.num_cols(),
            x.num_rows(),
            x.num_cols()
        )));
    }
    Ok(())
}

/// [`AbstractSolver`] implemented with this library's solvers.
pub struct LibrarySolver {
    exec: Executor,
    options: SolverOptions,
    solver: Solver,
}

impl LibrarySolver {
    pub fn new(
        exec: &Executor,
        matrix: &AppMatrix,
        options: SolverOptions,
    ) -> Result<Self, FacadeError> {
        Self::with_restart(exec, matrix, options, Algorithm::DEFAULT_RESTART)
    }

    pub fn with_restart(
        exec: &Executor,
        matrix: &AppMatrix,
        options: SolverOptions,
        restart: usize,
    ) -> Result<Self, FacadeError> {
        let factory = factory_for(&options, restart)?;
        let csr = convert_matrix(exec, matrix)?;
        let solver = factory.generate(csr)?;
        Ok(LibrarySolver {
            exec: exec.clone(),
            options,
            solver,
        })
    }

    /// The converted system matrix, shared with the solver.
    pub fn system_matrix(&self) -> &SharedCsr {
        self.solver.system_matrix()
    }
}

impl AbstractSolver for LibrarySolver {
    fn solve(&self, b: &AppVector, x: &mut AppVector) -> Result<SolveStats, FacadeError> {
        check_vectors(self.solver.size().rows, b, x)?;
        let b_view = const_view(&self.exec, b)?;
        let mut x_view = view(&self.exec, x)?;
        let report = self.solver.solve(&b_view, &mut x_view)?;
        // x_view aliases x, so the solution is already in place
        Ok(SolveStats {
            iterations: report.iterations,
            initial_residual_norm: report.initial_residual_norm,
            final_residual_norm: report.final_residual_norm,
            converged: report.converged,
            residual_history: report.residual_history,
        })
    }

    fn update_matrix_values(&mut self, values: &[f64]) -> Result<(), FacadeError> {
        self.solver.system_matrix().write().update_values(values)?;
        self.solver.refresh()?;
        Ok(())
    }

    fn options(&self) -> &SolverOptions {
        &self.options
    }
}

/// Maps a backend name to an executor and builds a [`LibrarySolver`].
pub fn create_solver(
    backend: &str,
    workers: Option<usize>,
    matrix: &AppMatrix,
    options: SolverOptions,
) -> Result<Box<dyn AbstractSolver>, FacadeError> {
    let exec = Executor::from_name(backend, workers)?;
    Ok(Box::new(LibrarySolver::new(&exec, matrix, options)?))
}

/// [`AbstractMatrix`] backed by a CSR copy of the application matrix.
pub struct LibraryMatrix {
    exec: Executor,
    csr: Csr,
}

impl LibraryMatrix {
    pub fn new(exec: &Executor, matrix: &AppMatrix) -> Result<Self, FacadeError> {
        Ok(LibraryMatrix {
            exec: exec.clone(),
            csr: convert_matrix(exec, matrix)?,
        })
    }
}

impl AbstractMatrix for LibraryMatrix {
    fn num_rows(&self) -> usize {
        self.csr.size().rows
    }

    fn num_cols(&self) -> usize {
        self.csr.size().cols
    }

    fn apply(&self, b: &AppVector, x: &mut AppVector) -> Result<(), FacadeError> {
        let b_view = const_view(&self.exec, b)?;
        let mut x_view = view(&self.exec, x)?;
        Ok(self.csr.apply(&b_view, &mut x_view)?)
    }

    fn update_values(&mut self, values: &[f64]) -> Result<(), FacadeError> {
        Ok(self.csr.update_values(values)?)
    }
}

/// [`AbstractVectorOps`] delegating to the dense kernels through views.
pub struct LibraryVectorOps {
    exec: Executor,
}

impl LibraryVectorOps {
    pub fn new(exec: &Executor) -> Self {
        LibraryVectorOps { exec: exec.clone() }
    }
}

impl AbstractVectorOps for LibraryVectorOps {
    fn scale(&self, v: &mut AppVector, alpha: f64) -> Result<(), FacadeError> {
        Ok(view(&self.exec, v)?.scale(alpha)?)
    }

    fn add_scaled(&self, v: &mut AppVector, alpha: f64, w: &AppVector) -> Result<(), FacadeError> {
        let w = const_view(&self.exec, w)?;
        Ok(view(&self.exec, v)?.add_scaled(alpha, &w)?)
    }

    fn dot(&self, v: &AppVector, w: &AppVector) -> Result<Vec<f64>, FacadeError> {
        Ok(const_view(&self.exec, v)?.dot(&const_view(&self.exec, w)?)?)
    }

    fn norm2(&self, v: &AppVector) -> Result<Vec<f64>, FacadeError> {
        Ok(const_view(&self.exec, v)?.norm2()?)
    }
}
