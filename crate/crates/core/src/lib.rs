//! Sparse linear algebra built around runtime-selectable executors and a
//! common linear operator abstraction.
//!
//! * [`executor`]: reference and parallel CPU backends, chosen at run time.
//! * [`container`]: executor-bound arrays, zero-copy views, triplet assembly.
//! * [`linop`]: the [`LinOp`] trait with [`Dense`] and [`Csr`] matrices.
//! * [`solver`]: stopping criteria, CG, BiCGStab, GMRES, Jacobi, dense LU.
//! * [`batched`]: many small systems with a shared pattern.
//! * [`facade`]: application-side interfaces and their implementations.

pub mod batched;
pub mod container;
pub mod error;
pub mod executor;
pub mod facade;
pub mod instrument;
pub mod linop;
pub mod solver;

pub use batched::{
    batch_solve, BatchAlgorithm, BatchCsr, BatchDense, BatchSolveReport, BatchSolver,
};
pub use container::{Array, Dim, Index, MatrixData, Ownership, Scalar, Triplet};
pub use error::{Error, Result};
pub use executor::{Executor, ExecutorKind};
pub use linop::{Csr, Dense, LinOp, SharedCsr};
pub use solver::{
    lu_factorize, Algorithm, Jacobi, LuFactors, PreconditionerKind, SolveReport, Solver,
    SolverFactory, StopReason, StoppingCriterion,
};
