//! Stopping criteria, the factory/generate pattern, and the solvers.
//!
//! A [`SolverFactory`] holds the configuration; [`SolverFactory::generate`]
//! binds it to a system matrix and returns a [`Solver`], which is itself a
//! [`LinOp`] approximating the inverse of that matrix.

mod criteria;
mod jacobi;
mod krylov;
mod lu;

pub use criteria::{StopReason, StoppingCriterion};
pub use jacobi::Jacobi;
pub use lu::{lu_factorize, LuFactors};

use crate::container::Dim;
use crate::error::{Error, Result};
use crate::executor::Executor;
use crate::linop::{check_apply, Dense, LinOp, SharedCsr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Cg,
    BiCgStab,
    Gmres {
        restart: usize,
    },
    /// Direct dense LU with partial pivoting.
    Lu,
    /// GMRES preconditioned by an LU factorization of the system matrix.
    GmresLu {
        restart: usize,
    },
}

impl Algorithm {
    pub const DEFAULT_RESTART: usize = 30;

    pub fn gmres() -> Self {
        Algorithm::Gmres {
            restart: Self::DEFAULT_RESTART,
        }
    }

    pub fn gmres_lu() -> Self {
        Algorithm::GmresLu {
            restart: Self::DEFAULT_RESTART,
        }
    }

    pub fn is_direct(self) -> bool {
        self == Algorithm::Lu
    }

    fn uses_lu(self) -> bool {
        matches!(self, Algorithm::Lu | Algorithm::GmresLu { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    Jacobi,
}

/// Outcome of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub initial_residual_norm: f64,
    pub final_residual_norm: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Residual norms seen by the stopping criteria, starting with the
    /// initial one.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverFactory {
    algorithm: Algorithm,
    criteria: Vec<StoppingCriterion>,
    preconditioner: Option<PreconditionerKind>,
    tol_breakdown: f64,
    tol_pivot: f64,
}

impl SolverFactory {
    pub const DEFAULT_TOL_BREAKDOWN: f64 = 1e-30;
    pub const DEFAULT_TOL_PIVOT: f64 = 1e-14;

    pub fn new(algorithm: Algorithm) -> Self {
        SolverFactory {
            algorithm,
            criteria: Vec::new(),
            preconditioner: None,
            tol_breakdown: Self::DEFAULT_TOL_BREAKDOWN,
            tol_pivot: Self::DEFAULT_TOL_PIVOT,
        }
    }

    pub fn with_criteria(mut self, criteria: impl IntoIterator<Item = StoppingCriterion>) -> Self {
        self.criteria = criteria.into_iter().collect();
        self
    }

    pub fn with_preconditioner(mut self, kind: impl Into<Option<PreconditionerKind>>) -> Self {
        self.preconditioner = kind.into();
        self
    }

    /// Breakdown threshold, relative to `‖b‖²`.
    pub fn with_tol_breakdown(mut self, tol: f64) -> Self {
        self.tol_breakdown = tol;
        self
    }

    /// Pivot threshold, relative to the largest magnitude in the column.
    pub fn with_tol_pivot(mut self, tol: f64) -> Self {
        self.tol_pivot = tol;
        self
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn criteria(&self) -> &[StoppingCriterion] {
        &self.criteria
    }

    pub fn preconditioner(&self) -> Option<PreconditionerKind> {
        self.preconditioner
    }

    /// Binds the configuration to `matrix`, computing the LU factorization
    /// or Jacobi diagonal where needed. The matrix is shared, not copied.
    pub fn generate(&self, matrix: impl Into<SharedCsr>) -> Result<Solver> {
        let matrix = matrix.into();
        let size = matrix.size();
        if !size.is_square() {
            return Err(Error::InvalidArgument(format!(
                "solvers need a square matrix, got {size}"
            )));
        }
        if !self.algorithm.is_direct() && self.criteria.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one stopping criterion is required".into(),
            ));
        }
        for c in &self.criteria {
            if let StoppingCriterion::ResidualNorm(f) = *c {
                if !(f > 0.0 && f.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "reduction factor {f} must be positive"
                    )));
                }
            }
        }
        if let Algorithm::Gmres { restart: 0 } | Algorithm::GmresLu { restart: 0 } = self.algorithm
        {
            return Err(Error::InvalidArgument(
                "GMRES restart must be at least 1".into(),
            ));
        }
        let precond = build_preconditioner(self, &matrix)?;
        Ok(Solver {
            factory: self.clone(),
            matrix,
            precond,
        })
    }
}

#[derive(Debug)]
pub(crate) enum Preconditioner {
    Identity,
    Jacobi(Jacobi),
    Lu(LuFactors),
}

impl Preconditioner {
    pub(crate) fn apply(&self, r: &Dense<'_>, z: &mut Dense<'_>) -> Result<()> {
        match self {
            Preconditioner::Identity => z.copy_from(r),
            Preconditioner::Jacobi(j) => j.apply_impl(r, z),
            Preconditioner::Lu(f) => f.solve_dense(r, z),
        }
    }
}

fn build_preconditioner(factory: &SolverFactory, matrix: &SharedCsr) -> Result<Preconditioner> {
    let csr = matrix.read();
    Ok(if factory.algorithm.uses_lu() {
        Preconditioner::Lu(lu_factorize(&csr, factory.tol_pivot)?)
    } else {
        match factory.preconditioner {
            Some(PreconditionerKind::Jacobi) => Preconditioner::Jacobi(Jacobi::generate(&csr)?),
            None => Preconditioner::Identity,
        }
    })
}

/// A factory bound to a system matrix.
#[derive(Debug)]
pub struct Solver {
    factory: SolverFactory,
    matrix: SharedCsr,
    precond: Preconditioner,
}

impl Solver {
    pub fn factory(&self) -> &SolverFactory {
        &self.factory
    }

    pub fn system_matrix(&self) -> &SharedCsr {
        &self.matrix
    }

    pub fn lu_factors(&self) -> Option<&LuFactors> {
        match &self.precond {
            Preconditioner::Lu(f) => Some(f),
            _ => None,
        }
    }

    /// Recomputes the factorization or preconditioner from the current
    /// matrix values. Needed after values change for LU-based solvers.
    pub fn refresh(&mut self) -> Result<()> {
        self.precond = build_preconditioner(&self.factory, &self.matrix)?;
        Ok(())
    }

    /// Solves `A·x = b` using `x` as initial guess.
    ///
    /// Columns are solved independently. With several columns the report
    /// aggregates them: the largest iteration count and residual norms, and
    /// `converged` only if every column converged.
    pub fn solve(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<SolveReport> {
        check_apply("solve", self.matrix.size(), b, x)?;
        let mut total: Option<SolveReport> = None;
        for j in 0..b.size().cols {
            let bj = b.column(j);
            let mut xj = x.column_mut(j)?;
            let report = self.solve_column(&bj, &mut xj)?;
            total = Some(match total {
                None => report,
                Some(acc) => merge(acc, report),
            });
        }
        Ok(total.expect("at least one column"))
    }

    fn solve_column(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<SolveReport> {
        let ctx = krylov::Context {
            matrix: &self.matrix,
            precond: &self.precond,
            criteria: &self.factory.criteria,
            tol_breakdown: self.factory.tol_breakdown,
        };
        match self.factory.algorithm {
            Algorithm::Cg => krylov::cg(&ctx, b, x),
            Algorithm::BiCgStab => krylov::bicgstab(&ctx, b, x),
            Algorithm::Gmres { restart } | Algorithm::GmresLu { restart } => {
                krylov::gmres(&ctx, restart, b, x)
            }
            Algorithm::Lu => self.direct_solve(b, x),
        }
    }

    fn direct_solve(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<SolveReport> {
        let mut r = Dense::new(b.executor(), Dim::new(b.size().rows, 1))?;
        r.copy_from(b)?;
        self.matrix.advanced_apply(-1.0, x, 1.0, &mut r)?;
        let initial = r.norm1()?;
        self.precond.apply(b, x)?;
        r.copy_from(b)?;
        self.matrix.advanced_apply(-1.0, x, 1.0, &mut r)?;
        let final_norm = r.norm1()?;
        Ok(SolveReport {
            iterations: 0,
            initial_residual_norm: initial,
            final_residual_norm: final_norm,
            converged: true,
            stop_reason: StopReason::Direct,
            residual_history: vec![initial, final_norm],
        })
    }
}

fn merge(acc: SolveReport, next: SolveReport) -> SolveReport {
    let worse = if next.converged && !acc.converged {
        &acc
    } else {
        &next
    };
    SolveReport {
        iterations: acc.iterations.max(next.iterations),
        initial_residual_norm: acc.initial_residual_norm.max(next.initial_residual_norm),
        final_residual_norm: acc.final_residual_norm.max(next.final_residual_norm),
        converged: acc.converged && next.converged,
        stop_reason: worse.stop_reason,
        residual_history: Vec::new(),
    }
}

impl LinOp for Solver {
    fn size(&self) -> Dim {
        self.matrix.size()
    }

    fn executor(&self) -> &Executor {
        self.matrix.executor()
    }

    fn apply_impl(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<()> {
        self.solve(b, x).map(drop)
    }
}
