//! Many small independent systems sharing one sparsity pattern.
//!
//! Each system runs its own recurrence and its own stopping test, so a
//! system that finishes early does no further work and a system that fails
//! does not affect its neighbours. On the parallel executor systems are
//! spread over the workers.

use crate::container::{Dim, Index, MatrixData};
use crate::error::{Error, Result};
use crate::executor::Executor;
use crate::linop::Csr;
use crate::solver::{
    PreconditionerKind, SolveReport, SolverFactory, StopReason, StoppingCriterion,
};

/// Batch of CSR matrices with a common pattern. Values are stored system
/// after system: entries `[k * nnz, (k + 1) * nnz)` belong to system `k`.
#[derive(Debug, Clone)]
pub struct BatchCsr {
    exec: Executor,
    size: Dim,
    num_systems: usize,
    row_ptrs: Vec<Index>,
    col_idxs: Vec<Index>,
    values: Vec<f64>,
}

impl BatchCsr {
    /// Takes the pattern from `template` (sorted, duplicates merged) and the
    /// values from `values`, given per system in the pattern's CSR order.
    pub fn read(
        exec: &Executor,
        num_systems: usize,
        template: &MatrixData,
        values: &[f64],
    ) -> Result<Self> {
        let pattern = Csr::read(exec, template)?;
        let nnz = pattern.num_stored_elements();
        if values.len() != num_systems * nnz {
            return Err(Error::InvalidArgument(format!(
                "expected {num_systems} x {nnz} = {} values, got {}",
                num_systems * nnz,
                values.len()
            )));
        }
        Ok(BatchCsr {
            exec: exec.clone(),
            size: pattern.size(),
            num_systems,
            row_ptrs: pattern.row_ptrs().to_vec(),
            col_idxs: pattern.col_idxs().to_vec(),
            values: values.to_vec(),
        })
    }

    /// Stacks matrices that share an identical pattern.
    pub fn from_matrices(exec: &Executor, matrices: &[Csr]) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty batch".into()))?;
        let mut values = Vec::with_capacity(matrices.len() * first.num_stored_elements());
        for (k, m) in matrices.iter().enumerate() {
            if m.size() != first.size()
                || m.row_ptrs() != first.row_ptrs()
                || m.col_idxs() != first.col_idxs()
            {
                return Err(Error::InvalidArgument(format!(
                    "system {k} does not share the batch sparsity pattern"
                )));
            }
            values.extend_from_slice(m.values());
        }
        Ok(BatchCsr {
            exec: exec.clone(),
            size: first.size(),
            num_systems: matrices.len(),
            row_ptrs: first.row_ptrs().to_vec(),
            col_idxs: first.col_idxs().to_vec(),
            values,
        })
    }

    pub fn executor(&self) -> &Executor {
        &self.exec
    }

    pub fn size(&self) -> Dim {
        self.size
    }

    pub fn num_systems(&self) -> usize {
        self.num_systems
    }

    pub fn num_stored_elements(&self) -> usize {
        self.col_idxs.len()
    }

    pub fn row_ptrs(&self) -> &[Index] {
        &self.row_ptrs
    }

    pub fn col_idxs(&self) -> &[Index] {
        &self.col_idxs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn system_values(&self, k: usize) -> &[f64] {
        let nnz = self.num_stored_elements();
        &self.values[k * nnz..(k + 1) * nnz]
    }

    /// Standalone copy of system `k`.
    pub fn system(&self, k: usize) -> Result<Csr> {
        if k >= self.num_systems {
            return Err(Error::InvalidArgument(format!(
                "no system {k} in a batch of {}",
                self.num_systems
            )));
        }
        Csr::from_parts(
            &self.exec,
            self.size,
            self.row_ptrs.clone(),
            self.col_idxs.clone(),
            self.system_values(k).to_vec(),
        )
    }
}

/// Batch of equally sized dense blocks, stored system after system.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchDense {
    size: Dim,
    num_systems: usize,
    values: Vec<f64>,
}

impl BatchDense {
    pub fn zeros(num_systems: usize, size: Dim) -> Self {
        BatchDense {
            size,
            num_systems,
            values: vec![0.0; num_systems * size.rows * size.cols],
        }
    }

    pub fn from_values(num_systems: usize, size: Dim, values: Vec<f64>) -> Result<Self> {
        if values.len() != num_systems * size.rows * size.cols {
            return Err(Error::InvalidArgument(format!(
                "{} values for {num_systems} blocks of {size}",
                values.len()
            )));
        }
        Ok(BatchDense {
            size,
            num_systems,
            values,
        })
    }

    pub fn size(&self) -> Dim {
        self.size
    }

    pub fn num_systems(&self) -> usize {
        self.num_systems
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn system(&self, k: usize) -> &[f64] {
        let len = self.size.rows * self.size.cols;
        &self.values[k * len..(k + 1) * len]
    }

    pub fn system_mut(&mut self, k: usize) -> &mut [f64] {
        let len = self.size.rows * self.size.cols;
        &mut self.values[k * len..(k + 1) * len]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSolveReport {
    pub systems: Vec<SolveReport>,
}

impl BatchSolveReport {
    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn iterations(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.iterations).collect()
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        self.systems.iter().map(|s| s.final_residual_norm).collect()
    }

    pub fn converged(&self) -> Vec<bool> {
        self.systems.iter().map(|s| s.converged).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.systems.iter().all(|s| s.converged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchAlgorithm {
    Cg,
    BiCgStab,
}

/// Configuration for batched iterative solves.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSolver {
    algorithm: BatchAlgorithm,
    criteria: Vec<StoppingCriterion>,
    preconditioner: Option<PreconditionerKind>,
    tol_breakdown: f64,
}

impl BatchSolver {
    pub fn new(algorithm: BatchAlgorithm) -> Self {
        BatchSolver {
            algorithm,
            criteria: Vec::new(),
            preconditioner: None,
            tol_breakdown: SolverFactory::DEFAULT_TOL_BREAKDOWN,
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

    pub fn with_tol_breakdown(mut self, tol: f64) -> Self {
        self.tol_breakdown = tol;
        self
    }

    /// Solves `A_k x_k = b_k` for every system; `x` holds the initial guesses.
    pub fn solve(
        &self,
        a: &BatchCsr,
        b: &BatchDense,
        x: &mut BatchDense,
    ) -> Result<BatchSolveReport> {
        if self.criteria.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one stopping criterion is required".into(),
            ));
        }
        let n = a.size.rows;
        let vec_dim = Dim::new(n, 1);
        if !a.size.is_square() {
            return Err(Error::InvalidArgument(format!(
                "batch systems must be square, got {}",
                a.size
            )));
        }
        for (name, d) in [("b", b), ("x", &*x)] {
            if d.size != vec_dim || d.num_systems != a.num_systems {
                return Err(Error::dimension(
                    "batch_solve",
                    format!("{name}: {} x {vec_dim}", a.num_systems),
                    format!("{name}: {} x {}", d.num_systems, d.size),
                ));
            }
        }

        let mut slots: Vec<Slot<'_>> = x
            .values
            .chunks_mut(n.max(1))
            .take(a.num_systems)
            .map(|x| Slot { x, report: None })
            .collect();
        if n == 0 {
            slots = (0..a.num_systems)
                .map(|_| Slot {
                    x: &mut [],
                    report: None,
                })
                .collect();
        }
        a.exec.for_each_mut(&mut slots, |k, slot| {
            let sys = System {
                row_ptrs: &a.row_ptrs,
                col_idxs: &a.col_idxs,
                values: a.system_values(k),
            };
            slot.report = Some(self.solve_system(&sys, b.system(k), slot.x));
        })?;
        Ok(BatchSolveReport {
            systems: slots
                .into_iter()
                .map(|s| s.report.expect("every system visited"))
                .collect(),
        })
    }

    fn solve_system(&self, sys: &System<'_>, b: &[f64], x: &mut [f64]) -> SolveReport {
        let inv_diag = match self.preconditioner {
            None => None,
            Some(PreconditionerKind::Jacobi) => match sys.inverse_diagonal() {
                Some(d) => Some(d),
                None => return failed(0, f64::NAN, f64::NAN, Vec::new()),
            },
        };
        let run = Run {
            sys,
            inv_diag: inv_diag.as_deref(),
            criteria: &self.criteria,
            tol_breakdown: self.tol_breakdown,
        };
        match self.algorithm {
            BatchAlgorithm::Cg => run.cg(b, x),
            BatchAlgorithm::BiCgStab => run.bicgstab(b, x),
        }
    }
}

/// Convenience wrapper around [`BatchSolver`] without preconditioning.
pub fn batch_solve(
    algorithm: BatchAlgorithm,
    criteria: &[StoppingCriterion],
    a: &BatchCsr,
    b: &BatchDense,
    x: &mut BatchDense,
) -> Result<BatchSolveReport> {
    BatchSolver::new(algorithm)
        .with_criteria(criteria.iter().copied())
        .solve(a, b, x)
}

struct Slot<'a> {
    x: &'a mut [f64],
    report: Option<SolveReport>,
}

struct System<'a> {
    row_ptrs: &'a [Index],
    col_idxs: &'a [Index],
    values: &'a [f64],
}

impl System<'_> {
    /// `out := alpha * A * v + beta * out`, `out` unread when `beta == 0`.
    fn spmv(&self, alpha: f64, v: &[f64], beta: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut sum = 0.0;
            for p in self.row_ptrs[i]..self.row_ptrs[i + 1] {
                sum += self.values[p] * v[self.col_idxs[p]];
            }
            *o = if beta == 0.0 {
                alpha * sum
            } else {
                alpha * sum + beta * *o
            };
        }
    }

    fn inverse_diagonal(&self) -> Option<Vec<f64>> {
        (0..self.row_ptrs.len() - 1)
            .map(|i| {
                let range = self.row_ptrs[i]..self.row_ptrs[i + 1];
                let k = self.col_idxs[range.clone()].binary_search(&i).ok()?;
                let d = self.values[range.start + k];
                (d != 0.0 && d.is_finite()).then(|| 1.0 / d)
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        sum += x * y;
    }
    sum
}

/// `y := alpha * x + beta * y`, `y` unread when `beta == 0`.
fn axpby(alpha: f64, x: &[f64], beta: f64, y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = if beta == 0.0 {
            alpha * xi
        } else {
            alpha * xi + beta * *yi
        };
    }
}

fn failed(iterations: usize, initial: f64, last: f64, history: Vec<f64>) -> SolveReport {
    SolveReport {
        iterations,
        initial_residual_norm: initial,
        final_residual_norm: last,
        converged: false,
        stop_reason: StopReason::Breakdown,
        residual_history: history,
    }
}

fn finished(iterations: usize, last: f64, reason: StopReason, history: Vec<f64>) -> SolveReport {
    SolveReport {
        iterations,
        initial_residual_norm: history[0],
        final_residual_norm: last,
        converged: reason == StopReason::ResidualNorm,
        stop_reason: reason,
        residual_history: history,
    }
}

fn tiny(value: f64, scale: f64) -> bool {
    !value.is_finite() || value.abs() <= scale
}

struct Run<'a> {
    sys: &'a System<'a>,
    inv_diag: Option<&'a [f64]>,
    criteria: &'a [StoppingCriterion],
    tol_breakdown: f64,
}

impl Run<'_> {
    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        match self.inv_diag {
            None => z.copy_from_slice(r),
            Some(d) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                    *zi = di * ri;
                }
            }
        }
    }

    fn stop(&self, iteration: usize, initial: f64, current: f64) -> Option<StopReason> {
        let mut fired = None;
        for c in self.criteria {
            if c.check(iteration, initial, current) {
                if c.reason() == StopReason::ResidualNorm {
                    return Some(StopReason::ResidualNorm);
                }
                fired = Some(c.reason());
            }
        }
        fired
    }

    fn initial_residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = b.to_vec();
        self.sys.spmv(-1.0, x, 1.0, &mut r);
        r
    }

    fn cg(&self, b: &[f64], x: &mut [f64]) -> SolveReport {
        let n = b.len();
        let mut r = self.initial_residual(b, x);
        let r0 = dot(&r, &r).sqrt();
        let mut history = vec![r0];
        if let Some(reason) = self.stop(0, r0, r0) {
            return finished(0, r0, reason, history);
        }
        let threshold = self.tol_breakdown * dot(b, b);
        let mut z = vec![0.0; n];
        let mut q = vec![0.0; n];
        self.precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rho = dot(&r, &z);
        let mut rk = r0;
        let mut iter = 0;
        loop {
            self.sys.spmv(1.0, &p, 0.0, &mut q);
            let pq = dot(&p, &q);
            if tiny(pq, threshold) {
                return failed(iter, r0, rk, history);
            }
            let alpha = rho / pq;
            axpby(alpha, &p, 1.0, x);
            axpby(-alpha, &q, 1.0, &mut r);
            iter += 1;
            rk = dot(&r, &r).sqrt();
            history.push(rk);
            if let Some(reason) = self.stop(iter, r0, rk) {
                return finished(iter, rk, reason, history);
            }
            if rk == 0.0 {
                return finished(iter, rk, StopReason::ResidualNorm, history);
            }
            self.precondition(&r, &mut z);
            let rho_next = dot(&r, &z);
            if tiny(rho_next, threshold) {
                return failed(iter, r0, rk, history);
            }
            let beta = rho_next / rho;
            rho = rho_next;
            axpby(1.0, &z, beta, &mut p);
        }
    }

    fn bicgstab(&self, b: &[f64], x: &mut [f64]) -> SolveReport {
        let n = b.len();
        let mut r = self.initial_residual(b, x);
        let r0 = dot(&r, &r).sqrt();
        let mut history = vec![r0];
        if let Some(reason) = self.stop(0, r0, r0) {
            return finished(0, r0, reason, history);
        }
        let threshold = self.tol_breakdown * dot(b, b);
        let r_hat = r.clone();
        let mut p = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut t = vec![0.0; n];
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut rk = r0;
        let mut iter = 0;
        loop {
            let rho_next = dot(&r_hat, &r);
            if tiny(rho_next, threshold) {
                return failed(iter, r0, rk, history);
            }
            if iter == 0 {
                p.copy_from_slice(&r);
            } else {
                let beta = (rho_next / rho) * (alpha / omega);
                axpby(-omega, &v, 1.0, &mut p);
                axpby(1.0, &r, beta, &mut p);
            }
            rho = rho_next;
            self.precondition(&p, &mut y);
            self.sys.spmv(1.0, &y, 0.0, &mut v);
            let rv = dot(&r_hat, &v);
            if tiny(rv, threshold) {
                return failed(iter, r0, rk, history);
            }
            alpha = rho / rv;
            s.copy_from_slice(&r);
            axpby(-alpha, &v, 1.0, &mut s);
            let sk = dot(&s, &s).sqrt();
            if self.stop(iter + 1, r0, sk) == Some(StopReason::ResidualNorm) {
                axpby(alpha, &y, 1.0, x);
                history.push(sk);
                return finished(iter + 1, sk, StopReason::ResidualNorm, history);
            }
            self.precondition(&s, &mut z);
            self.sys.spmv(1.0, &z, 0.0, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 || !tt.is_finite() {
                return failed(iter, r0, rk, history);
            }
            omega = dot(&t, &s) / tt;
            axpby(alpha, &y, 1.0, x);
            axpby(omega, &z, 1.0, x);
            r.copy_from_slice(&s);
            axpby(-omega, &t, 1.0, &mut r);
            iter += 1;
            rk = dot(&r, &r).sqrt();
            history.push(rk);
            if let Some(reason) = self.stop(iter, r0, rk) {
                return finished(iter, rk, reason, history);
            }
            if rk == 0.0 {
                return finished(iter, rk, StopReason::ResidualNorm, history);
            }
            if omega == 0.0 {
                return failed(iter, r0, rk, history);
            }
        }
    }
}
