use crate::container::{Array, Dim, Ownership};
use crate::error::{Error, Result};
use crate::executor::{Executor, StridedMut, StridedRef};

use super::LinOp;

/// Row-major dense matrix with a leading dimension (`stride`).
///
/// Element `(i, j)` lives at `values[i * stride + j]`. A `Dense` may own its
/// values or borrow them from the caller, in which case no data is copied.
#[derive(Debug)]
pub struct Dense<'a> {
    size: Dim,
    stride: usize,
    values: Array<'a, f64>,
}

fn required_len(size: Dim, stride: usize) -> usize {
    if size.rows == 0 {
        0
    } else {
        (size.rows - 1) * stride + size.cols
    }
}

impl Dense<'static> {
    /// Zero matrix with `stride == size.cols`.
    pub fn new(exec: &Executor, size: Dim) -> Result<Self> {
        Self::with_stride(exec, size, size.cols)
    }

    pub fn with_stride(exec: &Executor, size: Dim, stride: usize) -> Result<Self> {
        check_stride(size, stride)?;
        let values = Array::new(exec, size.rows * stride)?;
        Ok(Dense {
            size,
            stride,
            values,
        })
    }

    pub fn from_row_major(exec: &Executor, size: Dim, values: Vec<f64>) -> Result<Self> {
        if values.len() != size.rows * size.cols {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {size} matrix",
                values.len()
            )));
        }
        Ok(Dense {
            size,
            stride: size.cols,
            values: Array::from_vec(exec, values),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(exec: &Executor, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::from_row_major(exec, Dim::new(rows.len(), cols), data)
    }

    /// Column vector with the given entries.
    pub fn vector(exec: &Executor, values: &[f64]) -> Self {
        Dense {
            size: Dim::new(values.len(), 1),
            stride: 1,
            values: Array::from_vec(exec, values.to_vec()),
        }
    }
}

impl<'a> Dense<'a> {
    /// Mutable zero-copy view over caller storage.
    pub fn view(exec: &Executor, size: Dim, data: &'a mut [f64], stride: usize) -> Result<Self> {
        check_stride(size, stride)?;
        let len = required_len(size, stride);
        Ok(Dense {
            size,
            stride,
            values: Array::view(exec, len, data)?,
        })
    }

    /// Read-only zero-copy view over caller storage.
    pub fn const_view(exec: &Executor, size: Dim, data: &'a [f64], stride: usize) -> Result<Self> {
        check_stride(size, stride)?;
        let len = required_len(size, stride);
        Ok(Dense {
            size,
            stride,
            values: Array::const_view(exec, len, data)?,
        })
    }

    pub fn from_array(size: Dim, values: Array<'a, f64>, stride: usize) -> Result<Self> {
        check_stride(size, stride)?;
        let need = required_len(size, stride);
        if values.len() < need {
            return Err(Error::InvalidArgument(format!(
                "array of {} elements cannot hold a {size} matrix with stride {stride}",
                values.len()
            )));
        }
        Ok(Dense {
            size,
            stride,
            values,
        })
    }

    pub fn size(&self) -> Dim {
        self.size
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn executor(&self) -> &Executor {
        self.values.executor()
    }

    pub fn ownership(&self) -> Ownership {
        self.values.ownership()
    }

    /// Raw strided storage.
    pub fn values(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn values_mut(&mut self) -> Result<&mut [f64]> {
        self.values.as_mut_slice()
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        assert!(
            row < self.size.rows && col < self.size.cols,
            "index out of bounds"
        );
        self.values()[row * self.stride + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.size.rows || col >= self.size.cols {
            return Err(Error::InvalidArgument(format!(
                "({row}, {col}) outside a {} matrix",
                self.size
            )));
        }
        let stride = self.stride;
        self.values_mut()?[row * stride + col] = value;
        Ok(())
    }

    /// Read-only view of column `j`, sharing storage.
    pub fn column(&self, j: usize) -> Dense<'_> {
        assert!(j < self.size.cols, "column out of bounds");
        let data = &self.values()[j..];
        Dense::const_view(
            self.executor(),
            Dim::new(self.size.rows, 1),
            data,
            self.stride.max(1),
        )
        .expect("column view fits in parent storage")
    }

    /// Mutable view of column `j`, sharing storage.
    pub fn column_mut(&mut self, j: usize) -> Result<Dense<'_>> {
        assert!(j < self.size.cols, "column out of bounds");
        let (rows, stride) = (self.size.rows, self.stride.max(1));
        let exec = self.executor().clone();
        let data = &mut self.values_mut()?[j..];
        Dense::view(&exec, Dim::new(rows, 1), data, stride)
    }

    /// Entries in compact row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let s = self.strided();
        (0..s.rows).flat_map(|i| s.row(i).iter().copied()).collect()
    }

    /// Owning copy on `exec`, preserving the stride.
    pub fn clone_to(&self, exec: &Executor) -> Result<Dense<'static>> {
        Ok(Dense {
            size: self.size,
            stride: self.stride,
            values: self.values.copy_to(exec)?,
        })
    }

    pub fn fill(&mut self, value: f64) -> Result<()> {
        let exec = self.executor().clone();
        exec.fill(self.strided_mut()?, value)
    }

    /// `self := alpha * self`.
    pub fn scale(&mut self, alpha: f64) -> Result<()> {
        let exec = self.executor().clone();
        exec.scale(alpha, self.strided_mut()?)
    }

    /// `self := self + alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Dense<'_>) -> Result<()> {
        self.axpby(alpha, other, 1.0)
    }

    /// `self := alpha * other + beta * self`.
    pub fn axpby(&mut self, alpha: f64, other: &Dense<'_>, beta: f64) -> Result<()> {
        self.check_same_shape("axpby", other)?;
        let exec = self.executor().clone();
        exec.axpby(alpha, other.strided(), beta, self.strided_mut()?)
    }

    /// `self := other`, element-wise through the executor.
    pub fn copy_from(&mut self, other: &Dense<'_>) -> Result<()> {
        self.axpby(1.0, other, 0.0)
    }

    /// Column-wise inner products.
    pub fn dot(&self, other: &Dense<'_>) -> Result<Vec<f64>> {
        self.check_same_shape("dot", other)?;
        let mut out = vec![0.0; self.size.cols];
        self.executor()
            .dot(self.strided(), other.strided(), &mut out)?;
        Ok(out)
    }

    /// Column-wise Euclidean norms.
    pub fn norm2(&self) -> Result<Vec<f64>> {
        Ok(self.dot(self)?.into_iter().map(f64::sqrt).collect())
    }

    /// Inner product of two single-column operands.
    pub(crate) fn dot1(&self, other: &Dense<'_>) -> Result<f64> {
        self.check_same_shape("dot", other)?;
        let mut out = [0.0];
        self.executor()
            .dot(self.strided(), other.strided(), &mut out)?;
        Ok(out[0])
    }

    pub(crate) fn norm1(&self) -> Result<f64> {
        Ok(self.dot1(self)?.sqrt())
    }

    /// `z[i, :] := diag[i] * r[i, :]` written into `self`.
    pub(crate) fn diag_scale_from(&mut self, diag: &[f64], r: &Dense<'_>) -> Result<()> {
        self.check_same_shape("diag_scale", r)?;
        if diag.len() != self.size.rows {
            return Err(Error::dimension("diag_scale", self.size.rows, diag.len()));
        }
        let exec = self.executor().clone();
        exec.diag_scale(diag, r.strided(), self.strided_mut()?)
    }

    pub(crate) fn strided(&self) -> StridedRef<'_> {
        StridedRef {
            rows: self.size.rows,
            cols: self.size.cols,
            stride: self.stride,
            data: self.values(),
        }
    }

    pub(crate) fn strided_mut(&mut self) -> Result<StridedMut<'_>> {
        let (rows, cols, stride) = (self.size.rows, self.size.cols, self.stride);
        Ok(StridedMut {
            rows,
            cols,
            stride,
            data: self.values_mut()?,
        })
    }

    /// True if the storage ranges of `self` and `other` intersect.
    pub(crate) fn overlaps(&self, other: &Dense<'_>) -> bool {
        let a = self.values().as_ptr_range();
        let b = other.values().as_ptr_range();
        !self.values().is_empty()
            && !other.values().is_empty()
            && a.start < b.end
            && b.start < a.end
    }

    fn check_same_shape(&self, op: &'static str, other: &Dense<'_>) -> Result<()> {
        if self.size != other.size {
            return Err(Error::dimension(op, self.size, other.size));
        }
        Ok(())
    }
}

fn check_stride(size: Dim, stride: usize) -> Result<()> {
    if stride < size.cols {
        return Err(Error::InvalidArgument(format!(
            "stride {stride} smaller than column count {}",
            size.cols
        )));
    }
    Ok(())
}

impl LinOp for Dense<'_> {
    fn size(&self) -> Dim {
        self.size
    }

    fn executor(&self) -> &Executor {
        self.values.executor()
    }

    fn apply_impl(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<()> {
        self.advanced_apply_impl(1.0, b, 0.0, x)
    }

    fn advanced_apply_impl(
        &self,
        alpha: f64,
        b: &Dense<'_>,
        beta: f64,
        x: &mut Dense<'_>,
    ) -> Result<()> {
        let exec = self.executor().clone();
        exec.dense_gemm(alpha, self.strided(), b.strided(), beta, x.strided_mut()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec() -> Executor {
        Executor::reference()
    }

    #[test]
    fn add_scaled_dot_norm() {
        let e = exec();
        let mut v = Dense::vector(&e, &[1.0, 2.0]);
        v.add_scaled(0.5, &Dense::vector(&e, &[2.0, 4.0])).unwrap();
        assert_eq!(v.to_row_major(), vec![2.0, 4.0]);

        let a = Dense::vector(&e, &[1.0, 2.0]);
        assert_eq!(a.dot(&Dense::vector(&e, &[3.0, 4.0])).unwrap(), vec![11.0]);
        assert_eq!(Dense::vector(&e, &[3.0, 4.0]).norm2().unwrap(), vec![5.0]);
    }

    #[test]
    fn shape_mismatch() {
        let e = exec();
        let mut v = Dense::vector(&e, &[1.0, 2.0]);
        let w = Dense::vector(&e, &[1.0, 2.0, 3.0]);
        assert!(matches!(
            v.add_scaled(1.0, &w),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(v.dot(&w), Err(Error::Dimension { .. })));
    }

    #[test]
    fn multi_column_blas_is_columnwise() {
        let e = exec();
        let m = Dense::from_rows(&e, &[[1.0, 3.0], [2.0, 4.0]]).unwrap();
        assert_eq!(m.norm2().unwrap(), vec![5f64.sqrt(), 5.0]);
        let mut s = Dense::from_rows(&e, &[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        s.scale(3.0).unwrap();
        assert_eq!(m.dot(&s).unwrap(), vec![9.0, 21.0]);
    }

    #[test]
    fn strided_view_reads_and_writes() {
        let e = exec();
        let mut buf = vec![1.0, 2.0, -1.0, 3.0, 4.0, -1.0];
        {
            let mut d = Dense::view(&e, Dim::new(2, 2), &mut buf, 3).unwrap();
            assert_eq!(d.at(1, 0), 3.0);
            d.scale(2.0).unwrap();
            assert_eq!(d.to_row_major(), vec![2.0, 4.0, 6.0, 8.0]);
        }
        assert_eq!(buf, vec![2.0, 4.0, -1.0, 6.0, 8.0, -1.0]);
    }

    #[test]
    fn const_view_forbids_writes() {
        let e = exec();
        let buf = vec![1.0, 2.0];
        let mut d = Dense::const_view(&e, Dim::new(2, 1), &buf, 1).unwrap();
        assert_eq!(d.set(0, 0, 1.0), Err(Error::ReadOnly));
        assert_eq!(d.scale(2.0), Err(Error::ReadOnly));
    }

    #[test]
    fn stride_too_small() {
        let e = exec();
        assert!(Dense::with_stride(&e, Dim::new(2, 3), 2).is_err());
    }

    #[test]
    fn column_views_alias() {
        let e = exec();
        let mut m = Dense::from_rows(&e, &[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(m.column(1).to_row_major(), vec![2.0, 4.0]);
        m.column_mut(0).unwrap().scale(10.0).unwrap();
        assert_eq!(m.to_row_major(), vec![10.0, 2.0, 30.0, 4.0]);
    }

    #[test]
    fn dense_apply() {
        let e = exec();
        let a = Dense::from_rows(&e, &[[1.0, 2.0], [0.0, 3.0]]).unwrap();
        let b = Dense::vector(&e, &[1.0, 1.0]);
        let mut x = Dense::new(&e, Dim::new(2, 1)).unwrap();
        a.apply(&b, &mut x).unwrap();
        assert_eq!(x.to_row_major(), vec![3.0, 3.0]);
    }
}
