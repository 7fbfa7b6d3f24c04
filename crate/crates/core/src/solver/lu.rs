//! Dense LU factorization with partial pivoting.

use crate::error::{Error, Result};
use crate::linop::{Csr, Dense};

/// Factors `P·A = L·U` stored compactly: `U` on and above the diagonal,
/// the multipliers of the unit lower factor `L` below it.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    /// Row `i` of `P·A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    lu: Vec<f64>,
}

/// Factorizes a square sparse matrix densely.
///
/// A column is treated as singular when its largest remaining candidate
/// pivot is zero or at most `tol_pivot` times the largest magnitude in that
/// column of `A`.
pub fn lu_factorize(a: &Csr, tol_pivot: f64) -> Result<LuFactors> {
    let size = a.size();
    if !size.is_square() {
        return Err(Error::InvalidArgument(format!(
            "LU needs a square matrix, got {size}"
        )));
    }
    let n = size.rows;
    let mut lu = a.to_dense_values();
    let col_max: Vec<f64> = (0..n)
        .map(|j| (0..n).fold(0.0f64, |m, i| m.max(lu[i * n + j].abs())))
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (pivot_row, pivot) =
            (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold(
                    (k, -1.0),
                    |best, cand| if cand.1 > best.1 { cand } else { best },
                );
        if pivot == 0.0 || pivot <= tol_pivot * col_max[k] || !pivot.is_finite() {
            return Err(Error::SingularMatrix { column: k });
        }
        if pivot_row != k {
            for j in 0..n {
                lu.swap(k * n + j, pivot_row * n + j);
            }
            perm.swap(k, pivot_row);
        }
        let diag = lu[k * n + k];
        for i in k + 1..n {
            let l = lu[i * n + k] / diag;
            lu[i * n + k] = l;
            if l != 0.0 {
                for j in k + 1..n {
                    lu[i * n + j] -= l * lu[k * n + j];
                }
            }
        }
    }
    Ok(LuFactors { n, perm, lu })
}

impl LuFactors {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Dense row-major permutation matrix `P`.
    pub fn permutation_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut p = vec![0.0; n * n];
        for (i, &src) in self.perm.iter().enumerate() {
            p[i * n + src] = 1.0;
        }
        p
    }

    /// Dense row-major unit lower factor.
    pub fn lower(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            l[i * n..i * n + i].copy_from_slice(&self.lu[i * n..i * n + i]);
            l[i * n + i] = 1.0;
        }
        l
    }

    /// Dense row-major upper factor.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.n;
        let mut u = vec![0.0; n * n];
        for i in 0..n {
            u[i * n + i..(i + 1) * n].copy_from_slice(&self.lu[i * n + i..(i + 1) * n]);
        }
        u
    }

    /// Solves `A·x = rhs`, overwriting `rhs` with `x`.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&y[i + 1..]).map(|(u, v)| u * v).sum();
            y[i] = (y[i] - s) / self.lu[i * n + i];
        }
        rhs.copy_from_slice(&y);
    }

    /// Single-column solve between dense vectors of any stride.
    pub(crate) fn solve_dense(&self, r: &Dense<'_>, z: &mut Dense<'_>) -> Result<()> {
        let mut buf: Vec<f64> = (0..self.n).map(|i| r.at(i, 0)).collect();
        self.solve_in_place(&mut buf);
        for (i, v) in buf.into_iter().enumerate() {
            z.set(i, 0, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::{Dim, MatrixData};
    use crate::executor::Executor;

    fn csr(n: usize, dense: &[f64]) -> Csr {
        let mut md = MatrixData::new(Dim::square(n));
        for i in 0..n {
            for j in 0..n {
                if dense[i * n + j] != 0.0 {
                    md.add(i, j, dense[i * n + j]).unwrap();
                }
            }
        }
        Csr::read(&Executor::reference(), &md).unwrap()
    }

    #[test]
    fn identity_factors() {
        let id = [1.0, 0.0, 0.0, 1.0];
        let f = lu_factorize(&csr(2, &id), 1e-14).unwrap();
        assert_eq!(f.permutation(), &[0, 1]);
        assert_eq!(f.lower(), id.to_vec());
        assert_eq!(f.upper(), id.to_vec());
    }

    #[test]
    fn swap_needs_pivot() {
        let f = lu_factorize(&csr(2, &[0.0, 1.0, 1.0, 0.0]), 1e-14).unwrap();
        assert_eq!(f.permutation(), &[1, 0]);
        assert_eq!(f.permutation_matrix(), vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(f.lower(), vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.upper(), vec![1.0, 0.0, 0.0, 1.0]);
        let mut b = [1.0, 2.0];
        f.solve_in_place(&mut b);
        assert_eq!(b, [2.0, 1.0]);
    }

    #[test]
    fn singular_column_detected() {
        let err = lu_factorize(&csr(2, &[1.0, 2.0, 2.0, 4.0]), 1e-14).unwrap_err();
        assert_eq!(err, Error::SingularMatrix { column: 1 });
        let err = lu_factorize(&csr(2, &[0.0, 1.0, 0.0, 1.0]), 1e-14).unwrap_err();
        assert_eq!(err, Error::SingularMatrix { column: 0 });
    }
}
