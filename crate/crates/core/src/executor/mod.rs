//! Runtime-selected execution backends.
//!
//! An [`Executor`] is a cheap, cloneable handle naming a backend. Every kernel
//! the library runs goes through one of the dispatch methods at the bottom of
//! this file, which pick the implementation from the executor's dynamic kind.
//! Nothing outside this module inspects [`ExecutorKind`] to choose code paths.
//!
//! Both backends live in host memory. The parallel backend splits row loops
//! over a private thread pool; its reductions sum fixed-size row blocks and
//! combine the block partials in index order, so the result does not depend
//! on how many workers run them.

mod parallel;
mod reference;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

use parallel::ParallelBackend;
use reference::ReferenceBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExecutorKind {
    /// Sequential reference kernels.
    Reference,
    /// Multi-threaded CPU kernels.
    Parallel,
}

impl ExecutorKind {
    pub const NAMES: [&'static str; 2] = ["reference", "parallel"];

    pub fn name(self) -> &'static str {
        match self {
            ExecutorKind::Reference => "reference",
            ExecutorKind::Parallel => "parallel",
        }
    }
}

impl fmt::Display for ExecutorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExecutorKind {
    type Err = Error;

    /// Case-sensitive: only `"reference"` and `"parallel"` are accepted.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(ExecutorKind::Reference),
            "parallel" => Ok(ExecutorKind::Parallel),
            other => Err(Error::Configuration(format!(
                "unknown backend {other:?}; valid backends are {:?}",
                Self::NAMES
            ))),
        }
    }
}

enum Backend {
    Reference(ReferenceBackend),
    Parallel(ParallelBackend),
}

/// Handle to a compute backend and its memory space.
#[derive(Clone)]
pub struct Executor {
    backend: Arc<Backend>,
}

impl Executor {
    /// Creates an executor of the given kind.
    ///
    /// `worker_count` is ignored for [`ExecutorKind::Reference`]. For the
    /// parallel backend it defaults to the hardware concurrency and must be
    /// at least one.
    pub fn create(kind: ExecutorKind, worker_count: Option<usize>) -> Result<Self> {
        let backend = match kind {
            ExecutorKind::Reference => Backend::Reference(ReferenceBackend),
            ExecutorKind::Parallel => {
                let workers = match worker_count {
                    Some(0) => {
                        return Err(Error::InvalidArgument(
                            "worker_count must be at least 1".into(),
                        ))
                    }
                    Some(n) => n,
                    None => std::thread::available_parallelism().map_or(1, |n| n.get()),
                };
                Backend::Parallel(ParallelBackend::new(workers)?)
            }
        };
        Ok(Executor {
            backend: Arc::new(backend),
        })
    }

    pub fn reference() -> Self {
        Executor {
            backend: Arc::new(Backend::Reference(ReferenceBackend)),
        }
    }

    pub fn parallel(worker_count: usize) -> Result<Self> {
        Self::create(ExecutorKind::Parallel, Some(worker_count))
    }

    /// Maps a configuration name (`"reference"` / `"parallel"`) to an executor.
    pub fn from_name(name: &str, worker_count: Option<usize>) -> Result<Self> {
        Self::create(name.parse()?, worker_count)
    }

    pub fn kind(&self) -> ExecutorKind {
        match &*self.backend {
            Backend::Reference(_) => ExecutorKind::Reference,
            Backend::Parallel(_) => ExecutorKind::Parallel,
        }
    }

    pub fn worker_count(&self) -> usize {
        match &*self.backend {
            Backend::Reference(_) => 1,
            Backend::Parallel(p) => p.workers(),
        }
    }

    /// The executor owning host memory for this backend.
    ///
    /// Both backends are host resident, so the master is always a reference
    /// executor (a reference executor is its own master).
    pub fn master(&self) -> Executor {
        match &*self.backend {
            Backend::Reference(_) => self.clone(),
            Backend::Parallel(_) => Executor::reference(),
        }
    }

    /// True if both handles refer to the same backend instance.
    pub fn ptr_eq(&self, other: &Executor) -> bool {
        Arc::ptr_eq(&self.backend, &other.backend)
    }
}

impl PartialEq for Executor {
    fn eq(&self, other: &Self) -> bool {
        self.kind() == other.kind() && self.worker_count() == other.worker_count()
    }
}

impl fmt::Debug for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Executor")
            .field("kind", &self.kind())
            .field("worker_count", &self.worker_count())
            .finish()
    }
}

/// Read-only strided row-major block. Element `(i, j)` is `data[i * stride + j]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StridedRef<'a> {
    pub rows: usize,
    pub cols: usize,
    pub stride: usize,
    pub data: &'a [f64],
}

#[derive(Debug)]
pub(crate) struct StridedMut<'a> {
    pub rows: usize,
    pub cols: usize,
    pub stride: usize,
    pub data: &'a mut [f64],
}

impl<'a> StridedRef<'a> {
    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.stride..i * self.stride + self.cols]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.stride + j]
    }

    fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }
}

impl StridedMut<'_> {
    fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    /// Iterates over the `cols`-long row slices.
    fn rows_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        let (rows, cols) = (self.rows, self.cols);
        self.data
            .chunks_mut(self.stride.max(1))
            .take(rows)
            .map(move |r| &mut r[..cols])
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CsrRef<'a> {
    pub row_ptrs: &'a [usize],
    pub col_idxs: &'a [usize],
    pub values: &'a [f64],
}

// Row-level arithmetic shared by both backends, so that element-wise kernels
// agree bit for bit across them.

#[inline]
fn axpby_row(alpha: f64, x: &[f64], beta: f64, y: &mut [f64]) {
    if beta == 0.0 {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = alpha * xi;
        }
    } else {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = alpha * xi + beta * *yi;
        }
    }
}

#[inline]
fn store(alpha: f64, sum: f64, beta: f64, out: &mut f64) {
    *out = if beta == 0.0 {
        alpha * sum
    } else {
        alpha * sum + beta * *out
    };
}

#[inline]
fn spmv_row(i: usize, alpha: f64, a: &CsrRef<'_>, b: &StridedRef<'_>, beta: f64, out: &mut [f64]) {
    let range = a.row_ptrs[i]..a.row_ptrs[i + 1];
    for (j, o) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        for p in range.clone() {
            sum += a.values[p] * b.at(a.col_idxs[p], j);
        }
        store(alpha, sum, beta, o);
    }
}

#[inline]
fn gemm_row(
    i: usize,
    alpha: f64,
    a: &StridedRef<'_>,
    b: &StridedRef<'_>,
    beta: f64,
    out: &mut [f64],
) {
    let arow = a.row(i);
    for (j, o) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        for (l, al) in arow.iter().enumerate() {
            sum += al * b.at(l, j);
        }
        store(alpha, sum, beta, o);
    }
}

/// Kernel table implemented once per backend.
///
/// Every method has a default that reports the kernel as unsupported, so a
/// backend that does not register a kernel fails loudly instead of silently
/// running somewhere else.
pub(crate) trait Kernels {
    fn kind(&self) -> ExecutorKind;

    fn unsupported(&self, kernel: &'static str) -> Error {
        Error::UnsupportedBackend {
            kernel,
            backend: self.kind(),
        }
    }

    fn fill(&self, _x: StridedMut<'_>, _value: f64) -> Result<()> {
        Err(self.unsupported("fill"))
    }

    fn scale(&self, _alpha: f64, _x: StridedMut<'_>) -> Result<()> {
        Err(self.unsupported("scale"))
    }

    /// `y := alpha * x + beta * y`; `y` is not read when `beta == 0`.
    fn axpby(&self, _alpha: f64, _x: StridedRef<'_>, _beta: f64, _y: StridedMut<'_>) -> Result<()> {
        Err(self.unsupported("axpby"))
    }

    /// `z[i, :] := diag[i] * r[i, :]`.
    fn diag_scale(&self, _diag: &[f64], _r: StridedRef<'_>, _z: StridedMut<'_>) -> Result<()> {
        Err(self.unsupported("diag_scale"))
    }

    /// Column-wise inner products written to `out[..cols]`.
    fn dot(&self, _x: StridedRef<'_>, _y: StridedRef<'_>, _out: &mut [f64]) -> Result<()> {
        Err(self.unsupported("dot"))
    }

    /// `x := alpha * A * b + beta * x`.
    fn csr_spmv(
        &self,
        _alpha: f64,
        _a: CsrRef<'_>,
        _b: StridedRef<'_>,
        _beta: f64,
        _x: StridedMut<'_>,
    ) -> Result<()> {
        Err(self.unsupported("csr_spmv"))
    }

    fn dense_gemm(
        &self,
        _alpha: f64,
        _a: StridedRef<'_>,
        _b: StridedRef<'_>,
        _beta: f64,
        _x: StridedMut<'_>,
    ) -> Result<()> {
        Err(self.unsupported("dense_gemm"))
    }

    fn copy_elements<T: Copy + Send + Sync>(&self, _src: &[T], _dst: &mut [T]) -> Result<()> {
        Err(self.unsupported("copy_elements"))
    }

    /// Runs `f(index, item)` for every item. Items are independent.
    fn for_each_mut<T, F>(&self, _items: &mut [T], _f: F) -> Result<()>
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync,
    {
        Err(self.unsupported("for_each_mut"))
    }
}

macro_rules! dispatch {
    ($exec:expr, $method:ident($($arg:expr),* $(,)?)) => {
        match &*$exec.backend {
            Backend::Reference(b) => Kernels::$method(b, $($arg),*),
            Backend::Parallel(b) => Kernels::$method(b, $($arg),*),
        }
    };
}

impl Executor {
    pub(crate) fn fill(&self, x: StridedMut<'_>, value: f64) -> Result<()> {
        dispatch!(self, fill(x, value))
    }

    pub(crate) fn scale(&self, alpha: f64, x: StridedMut<'_>) -> Result<()> {
        dispatch!(self, scale(alpha, x))
    }

    pub(crate) fn axpby(
        &self,
        alpha: f64,
        x: StridedRef<'_>,
        beta: f64,
        y: StridedMut<'_>,
    ) -> Result<()> {
        dispatch!(self, axpby(alpha, x, beta, y))
    }

    pub(crate) fn diag_scale(
        &self,
        diag: &[f64],
        r: StridedRef<'_>,
        z: StridedMut<'_>,
    ) -> Result<()> {
        dispatch!(self, diag_scale(diag, r, z))
    }

    pub(crate) fn dot(&self, x: StridedRef<'_>, y: StridedRef<'_>, out: &mut [f64]) -> Result<()> {
        dispatch!(self, dot(x, y, out))
    }

    pub(crate) fn csr_spmv(
        &self,
        alpha: f64,
        a: CsrRef<'_>,
        b: StridedRef<'_>,
        beta: f64,
        x: StridedMut<'_>,
    ) -> Result<()> {
        dispatch!(self, csr_spmv(alpha, a, b, beta, x))
    }

    pub(crate) fn dense_gemm(
        &self,
        alpha: f64,
        a: StridedRef<'_>,
        b: StridedRef<'_>,
        beta: f64,
        x: StridedMut<'_>,
    ) -> Result<()> {
        dispatch!(self, dense_gemm(alpha, a, b, beta, x))
    }

    pub(crate) fn copy_elements<T: Copy + Send + Sync>(
        &self,
        src: &[T],
        dst: &mut [T],
    ) -> Result<()> {
        dispatch!(self, copy_elements(src, dst))
    }

    pub(crate) fn for_each_mut<T, F>(&self, items: &mut [T], f: F) -> Result<()>
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync,
    {
        dispatch!(self, for_each_mut(items, f))
    }
}
