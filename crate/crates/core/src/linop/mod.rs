//! The linear operator abstraction and the two matrix formats.
//!
//! Matrices, preconditioners and solvers all implement [`LinOp`], so code
//! that applies "an operator" does not care whether it multiplies by a
//! matrix or approximately applies its inverse. Operators without a stored
//! matrix, such as stencils, implement [`LinOp`] directly.

mod csr;
mod dense;

pub use csr::{Csr, SharedCsr};
pub use dense::Dense;

use crate::container::Dim;
use crate::error::{Error, Result};
use crate::executor::Executor;

/// A linear map between vector spaces of dimensions `size().cols` and
/// `size().rows`.
///
/// Implementors provide [`apply_impl`](LinOp::apply_impl); callers use
/// [`apply`](LinOp::apply), which validates shapes first. For solvers,
/// `x` on entry is the initial guess.
///
/// Input and output can never share storage: the borrow checker refuses
/// an immutable and a mutable borrow of the same vector.
///
/// ```compile_fail
/// use spla_core::{Csr, Dense, Executor, LinOp};
/// let exec = Executor::reference();
/// let a = Csr::identity(&exec, 2).unwrap();
/// let mut v = Dense::vector(&exec, &[1.0, 2.0]);
/// a.apply(&v, &mut v).unwrap();
/// ```
pub trait LinOp: Send + Sync {
    fn size(&self) -> Dim;

    fn executor(&self) -> &Executor;

    /// `x := op(b)`. Shapes have already been checked.
    fn apply_impl(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<()>;

    /// `x := alpha * op(b) + beta * x`. Shapes have already been checked.
    fn advanced_apply_impl(
        &self,
        alpha: f64,
        b: &Dense<'_>,
        beta: f64,
        x: &mut Dense<'_>,
    ) -> Result<()> {
        let mut tmp = Dense::new(x.executor(), x.size())?;
        tmp.copy_from(x)?;
        self.apply_impl(b, &mut tmp)?;
        x.axpby(alpha, &tmp, beta)
    }

    fn apply(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<()> {
        check_apply("apply", self.size(), b, x)?;
        self.apply_impl(b, x)
    }

    fn advanced_apply(
        &self,
        alpha: f64,
        b: &Dense<'_>,
        beta: f64,
        x: &mut Dense<'_>,
    ) -> Result<()> {
        check_apply("advanced_apply", self.size(), b, x)?;
        self.advanced_apply_impl(alpha, b, beta, x)
    }
}

/// Validates that `b` is `size.cols x k` and `x` is `size.rows x k`, `k >= 1`,
/// and that they occupy disjoint storage.
pub(crate) fn check_apply(op: &'static str, size: Dim, b: &Dense<'_>, x: &Dense<'_>) -> Result<()> {
    let k = b.size().cols;
    if b.size().rows != size.cols || k == 0 {
        return Err(Error::dimension(
            op,
            format!("b: {}x(k>=1)", size.cols),
            format!("b: {}", b.size()),
        ));
    }
    let want_x = Dim::new(size.rows, k);
    if x.size() != want_x {
        return Err(Error::dimension(
            op,
            format!("x: {want_x}"),
            format!("x: {}", x.size()),
        ));
    }
    if b.overlaps(x) {
        return Err(Error::Aliasing);
    }
    Ok(())
}

impl<T: LinOp + ?Sized> LinOp for Box<T> {
    fn size(&self) -> Dim {
        (**self).size()
    }

    fn executor(&self) -> &Executor {
        (**self).executor()
    }

    fn apply_impl(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<()> {
        (**self).apply_impl(b, x)
    }

    fn advanced_apply_impl(
        &self,
        alpha: f64,
        b: &Dense<'_>,
        beta: f64,
        x: &mut Dense<'_>,
    ) -> Result<()> {
        (**self).advanced_apply_impl(alpha, b, beta, x)
    }
}
