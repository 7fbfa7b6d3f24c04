//! Loose coupling: application-side interfaces and their library-backed
//! implementations.
//!
//! [`interface`] holds only application types. [`library`] implements those
//! interfaces with this crate's matrices and solvers, and [`registry`] keeps
//! built solvers alive between calls.

pub mod interface;
pub mod library;
pub mod registry;

pub use interface::{
    AbstractMatrix, AbstractSolver, AbstractVectorOps, AppMatrix, AppVector, FacadeError,
    SolveStats, SolverOptions,
};
pub use library::{
    convert_matrix, create_solver, factory_for, LibraryMatrix, LibrarySolver, LibraryVectorOps,
    ALGORITHMS, PRECONDITIONERS,
};
pub use registry::{SolverHandle, SolverRegistry};
