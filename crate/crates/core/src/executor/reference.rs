use super::{axpby_row, gemm_row, spmv_row, CsrRef, ExecutorKind, Kernels, StridedMut, StridedRef};
use crate::error::Result;

/// Single-threaded kernels. Reductions accumulate strictly in index order.
pub(super) struct ReferenceBackend;

impl Kernels for ReferenceBackend {
    fn kind(&self) -> ExecutorKind {
        ExecutorKind::Reference
    }

    fn fill(&self, mut x: StridedMut<'_>, value: f64) -> Result<()> {
        for row in x.rows_mut() {
            row.fill(value);
        }
        Ok(())
    }

    fn scale(&self, alpha: f64, mut x: StridedMut<'_>) -> Result<()> {
        for row in x.rows_mut() {
            row.iter_mut().for_each(|v| *v *= alpha);
        }
        Ok(())
    }

    fn axpby(&self, alpha: f64, x: StridedRef<'_>, beta: f64, mut y: StridedMut<'_>) -> Result<()> {
        for (i, row) in y.rows_mut().enumerate() {
            axpby_row(alpha, x.row(i), beta, row);
        }
        Ok(())
    }

    fn diag_scale(&self, diag: &[f64], r: StridedRef<'_>, mut z: StridedMut<'_>) -> Result<()> {
        for (i, row) in z.rows_mut().enumerate() {
            axpby_row(diag[i], r.row(i), 0.0, row);
        }
        Ok(())
    }

    fn dot(&self, x: StridedRef<'_>, y: StridedRef<'_>, out: &mut [f64]) -> Result<()> {
        for (j, o) in out.iter_mut().take(x.cols).enumerate() {
            let mut sum = 0.0;
            for i in 0..x.rows {
                sum += x.at(i, j) * y.at(i, j);
            }
            *o = sum;
        }
        Ok(())
    }

    fn csr_spmv(
        &self,
        alpha: f64,
        a: CsrRef<'_>,
        b: StridedRef<'_>,
        beta: f64,
        mut x: StridedMut<'_>,
    ) -> Result<()> {
        for (i, row) in x.rows_mut().enumerate() {
            spmv_row(i, alpha, &a, &b, beta, row);
        }
        Ok(())
    }

    fn dense_gemm(
        &self,
        alpha: f64,
        a: StridedRef<'_>,
        b: StridedRef<'_>,
        beta: f64,
        mut x: StridedMut<'_>,
    ) -> Result<()> {
        for (i, row) in x.rows_mut().enumerate() {
            gemm_row(i, alpha, &a, &b, beta, row);
        }
        Ok(())
    }

    fn copy_elements<T: Copy + Send + Sync>(&self, src: &[T], dst: &mut [T]) -> Result<()> {
        dst.copy_from_slice(src);
        Ok(())
    }

    fn for_each_mut<T, F>(&self, items: &mut [T], f: F) -> Result<()>
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync,
    {
        for (i, item) in items.iter_mut().enumerate() {
            f(i, item);
        }
        Ok(())
    }
}
