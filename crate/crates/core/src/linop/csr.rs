use std::sync::Arc;

use parking_lot::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use crate::container::{Array, Dim, Index, MatrixData};
use crate::error::{Error, Result};
use crate::executor::{CsrRef, Executor};

use super::{Dense, LinOp};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row. The structure
/// (`row_ptrs`, `col_idxs`) is fixed after construction; values can be
/// replaced in place.
#[derive(Debug)]
pub struct Csr {
    size: Dim,
    row_ptrs: Array<'static, Index>,
    col_idxs: Array<'static, Index>,
    values: Array<'static, f64>,
}

impl Csr {
    /// Builds a CSR matrix from an assembly buffer. Columns are sorted
    /// within each row and duplicate coordinates are summed.
    pub fn read(exec: &Executor, md: &MatrixData) -> Result<Self> {
        let size = md.size();
        let mut counts = vec![0usize; size.rows + 1];
        for t in md.nonzeros() {
            if t.row >= size.rows || t.col >= size.cols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({}, {}) outside a {size} matrix",
                    t.row, t.col
                )));
            }
            counts[t.row + 1] += 1;
        }
        for i in 0..size.rows {
            counts[i + 1] += counts[i];
        }

        // bucket by row, keeping insertion order inside a row
        let mut next = counts.clone();
        let mut entries = vec![(0, 0.0); md.len()];
        for t in md.nonzeros() {
            entries[next[t.row]] = (t.col, t.value);
            next[t.row] += 1;
        }

        let mut row_ptrs = Vec::with_capacity(size.rows + 1);
        let mut col_idxs = Vec::with_capacity(md.len());
        let mut values = Vec::with_capacity(md.len());
        row_ptrs.push(0);
        for i in 0..size.rows {
            let row = &mut entries[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                if col_idxs.len() > row_ptrs[i] && col_idxs.last() == Some(&c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idxs.push(c);
                    values.push(v);
                }
            }
            row_ptrs.push(col_idxs.len());
        }

        Ok(Csr {
            size,
            row_ptrs: Array::from_vec(exec, row_ptrs),
            col_idxs: Array::from_vec(exec, col_idxs),
            values: Array::from_vec(exec, values),
        })
    }

    /// Assembles from raw arrays, validating every structural invariant.
    pub fn from_parts(
        exec: &Executor,
        size: Dim,
        row_ptrs: Vec<Index>,
        col_idxs: Vec<Index>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidArgument(msg));
        if row_ptrs.len() != size.rows + 1 {
            return invalid(format!(
                "expected {} row pointers, got {}",
                size.rows + 1,
                row_ptrs.len()
            ));
        }
        if row_ptrs[0] != 0 || row_ptrs[size.rows] != col_idxs.len() {
            return invalid("row pointers must start at 0 and end at nnz".into());
        }
        if col_idxs.len() != values.len() {
            return invalid("column index and value counts differ".into());
        }
        for i in 0..size.rows {
            if row_ptrs[i] > row_ptrs[i + 1] {
                return invalid(format!("row pointers decrease at row {i}"));
            }
            let cols = &col_idxs[row_ptrs[i]..row_ptrs[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return invalid(format!("columns of row {i} are not strictly increasing"));
            }
            if cols.last().is_some_and(|&c| c >= size.cols) {
                return invalid(format!("column index out of range in row {i}"));
            }
        }
        Ok(Csr {
            size,
            row_ptrs: Array::from_vec(exec, row_ptrs),
            col_idxs: Array::from_vec(exec, col_idxs),
            values: Array::from_vec(exec, values),
        })
    }

    pub fn identity(exec: &Executor, n: usize) -> Result<Self> {
        Self::from_parts(
            exec,
            Dim::square(n),
            (0..=n).collect(),
            (0..n).collect(),
            vec![1.0; n],
        )
    }

    /// Exports the stored entries in row-major order.
    pub fn write(&self) -> MatrixData {
        let mut md = MatrixData::new(self.size);
        for i in 0..self.size.rows {
            for p in self.row_range(i) {
                md.add(i, self.col_idxs()[p], self.values()[p])
                    .expect("stored entries are in bounds");
            }
        }
        md
    }

    /// Replaces the values, keeping the sparsity structure untouched.
    pub fn update_values(&mut self, new_values: &[f64]) -> Result<()> {
        let nnz = self.num_stored_elements();
        if new_values.len() != nnz {
            return Err(Error::InvalidArgument(format!(
                "expected {nnz} values, got {}",
                new_values.len()
            )));
        }
        let exec = self.values.executor().clone();
        exec.copy_elements(new_values, self.values.as_mut_slice()?)
    }

    pub fn size(&self) -> Dim {
        self.size
    }

    pub fn num_stored_elements(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptrs(&self) -> &[Index] {
        self.row_ptrs.as_slice()
    }

    pub fn col_idxs(&self) -> &[Index] {
        self.col_idxs.as_slice()
    }

    pub fn values(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        self.values.as_mut_slice().expect("matrix values are owned")
    }

    pub fn row_range(&self, row: usize) -> std::ops::Range<usize> {
        self.row_ptrs()[row]..self.row_ptrs()[row + 1]
    }

    /// Stored value at `(row, col)`, if the position is part of the pattern.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let range = self.row_range(row);
        let cols = &self.col_idxs()[range.clone()];
        cols.binary_search(&col)
            .ok()
            .map(|k| self.values()[range.start + k])
    }

    /// Diagonal entries; `None` where the diagonal is not stored.
    pub fn diagonal(&self) -> Vec<Option<f64>> {
        (0..self.size.rows.min(self.size.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Dense row-major copy of the matrix.
    pub fn to_dense_values(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.size.rows * self.size.cols];
        for i in 0..self.size.rows {
            for p in self.row_range(i) {
                out[i * self.size.cols + self.col_idxs()[p]] = self.values()[p];
            }
        }
        out
    }

    pub(crate) fn as_kernel_ref(&self) -> CsrRef<'_> {
        CsrRef {
            row_ptrs: self.row_ptrs(),
            col_idxs: self.col_idxs(),
            values: self.values(),
        }
    }
}

impl LinOp for Csr {
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
        self.executor().csr_spmv(
            alpha,
            self.as_kernel_ref(),
            b.strided(),
            beta,
            x.strided_mut()?,
        )
    }
}

/// A CSR matrix with shared ownership.
///
/// Solvers keep one of these instead of a copy, so value updates made
/// through any handle are seen by every holder.
#[derive(Debug, Clone)]
pub struct SharedCsr {
    inner: Arc<RwLock<Csr>>,
    exec: Executor,
    size: Dim,
}

impl SharedCsr {
    pub fn new(csr: Csr) -> Self {
        let exec = csr.executor().clone();
        let size = csr.size();
        SharedCsr {
            inner: Arc::new(RwLock::new(csr)),
            exec,
            size,
        }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Csr> {
        self.inner.read()
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, Csr> {
        self.inner.write()
    }

    pub fn ptr_eq(&self, other: &SharedCsr) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    pub fn owner_count(&self) -> usize {
        Arc::strong_count(&self.inner)
    }
}

impl From<Csr> for SharedCsr {
    fn from(csr: Csr) -> Self {
        SharedCsr::new(csr)
    }
}

impl LinOp for SharedCsr {
    fn size(&self) -> Dim {
        self.size
    }

    fn executor(&self) -> &Executor {
        &self.exec
    }

    fn apply_impl(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<()> {
        self.read().apply_impl(b, x)
    }

    fn advanced_apply_impl(
        &self,
        alpha: f64,
        b: &Dense<'_>,
        beta: f64,
        x: &mut Dense<'_>,
    ) -> Result<()> {
        self.read().advanced_apply_impl(alpha, b, beta, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(size: Dim, t: &[(usize, usize, f64)]) -> MatrixData {
        MatrixData::from_triplets(size, t.iter().copied()).unwrap()
    }

    #[test]
    fn read_two_by_two() {
        let e = Executor::reference();
        let m = Csr::read(
            &e,
            &md(
                Dim::square(2),
                &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
            ),
        )
        .unwrap();
        assert_eq!(m.row_ptrs(), &[0, 2, 4]);
        assert_eq!(m.col_idxs(), &[0, 1, 0, 1]);
        assert_eq!(m.values(), &[4.0, 1.0, 1.0, 3.0]);
    }

    #[test]
    fn read_empty_and_duplicates() {
        let e = Executor::reference();
        let m = Csr::read(&e, &md(Dim::square(2), &[])).unwrap();
        assert_eq!(m.row_ptrs(), &[0, 0, 0]);
        assert_eq!(m.num_stored_elements(), 0);

        let m = Csr::read(&e, &md(Dim::square(2), &[(0, 0, 1.0), (0, 0, 2.0)])).unwrap();
        assert_eq!(m.num_stored_elements(), 1);
        assert_eq!(m.get(0, 0), Some(3.0));
    }

    #[test]
    fn read_sorts_columns() {
        let e = Executor::reference();
        let m = Csr::read(
            &e,
            &md(
                Dim::new(2, 4),
                &[
                    (1, 3, 1.0),
                    (0, 2, 2.0),
                    (1, 0, 3.0),
                    (0, 1, 4.0),
                    (1, 3, 5.0),
                ],
            ),
        )
        .unwrap();
        assert_eq!(m.row_ptrs(), &[0, 2, 4]);
        assert_eq!(m.col_idxs(), &[1, 2, 0, 3]);
        assert_eq!(m.values(), &[4.0, 2.0, 3.0, 6.0]);
    }

    #[test]
    fn spmv_small() {
        let e = Executor::reference();
        let m = Csr::read(
            &e,
            &md(Dim::square(2), &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]),
        )
        .unwrap();
        let b = Dense::vector(&e, &[1.0, 1.0]);
        let mut x = Dense::vector(&e, &[0.0, 0.0]);
        m.apply(&b, &mut x).unwrap();
        assert_eq!(x.to_row_major(), vec![3.0, 3.0]);

        let bad = Dense::vector(&e, &[1.0, 1.0, 1.0]);
        let err = m.apply(&bad, &mut x).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }), "{err}");
    }

    #[test]
    fn advanced_apply_identity() {
        let e = Executor::reference();
        let id = Csr::identity(&e, 2).unwrap();
        let b = Dense::vector(&e, &[1.0, 1.0]);
        let mut x = Dense::vector(&e, &[3.0, 4.0]);
        id.advanced_apply(2.0, &b, -1.0, &mut x).unwrap();
        assert_eq!(x.to_row_major(), vec![-1.0, -2.0]);
        id.advanced_apply(0.0, &b, 1.0, &mut x).unwrap();
        assert_eq!(x.to_row_major(), vec![-1.0, -2.0]);
        id.advanced_apply(1.0, &b, 0.0, &mut x).unwrap();
        assert_eq!(x.to_row_major(), vec![1.0, 1.0]);
    }

    #[test]
    fn update_values_keeps_structure() {
        let e = Executor::reference();
        let mut m = Csr::identity(&e, 2).unwrap();
        let (rp, ci) = (m.row_ptrs().to_vec(), m.col_idxs().to_vec());
        m.update_values(&[5.0, 5.0]).unwrap();
        assert_eq!(m.values(), &[5.0, 5.0]);
        assert_eq!(m.row_ptrs(), &rp[..]);
        assert_eq!(m.col_idxs(), &ci[..]);
        assert!(matches!(
            m.update_values(&[1.0, 2.0, 3.0]),
            Err(Error::InvalidArgument(_))
        ));
        assert_eq!(m.values(), &[5.0, 5.0]);
    }

    #[test]
    fn raw_access_aliases() {
        let e = Executor::reference();
        let mut m = Csr::read(&e, &md(Dim::square(2), &[(0, 0, 4.0), (1, 1, 3.0)])).unwrap();
        assert_eq!(m.values(), &[4.0, 3.0]);
        assert_eq!(m.num_stored_elements(), 2);
        m.values_mut()[0] = 7.0;
        let b = Dense::vector(&e, &[1.0, 1.0]);
        let mut x = Dense::vector(&e, &[0.0, 0.0]);
        m.apply(&b, &mut x).unwrap();
        assert_eq!(x.to_row_major(), vec![7.0, 3.0]);
    }

    #[test]
    fn from_parts_validates() {
        let e = Executor::reference();
        let d = Dim::square(2);
        assert!(Csr::from_parts(&e, d, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
        assert!(Csr::from_parts(&e, d, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(Csr::from_parts(&e, d, vec![0, 1, 2], vec![0, 2], vec![1.0, 1.0]).is_err());
        assert!(Csr::from_parts(&e, d, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(Csr::from_parts(&e, d, vec![0, 1], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn shared_updates_are_visible() {
        let e = Executor::reference();
        let a = SharedCsr::new(Csr::identity(&e, 2).unwrap());
        let b = a.clone();
        b.write().update_values(&[2.0, 2.0]).unwrap();
        let rhs = Dense::vector(&e, &[1.0, 1.0]);
        let mut x = Dense::vector(&e, &[0.0, 0.0]);
        a.apply(&rhs, &mut x).unwrap();
        assert_eq!(x.to_row_major(), vec![2.0, 2.0]);
        assert!(a.ptr_eq(&b));
    }
}
