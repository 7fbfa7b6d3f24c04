//! Workload generators shared by the benchmarks.

use spla_core::{Csr, Dim, Executor, MatrixData};

/// 5-point Laplacian on an `n x n` interior grid (unscaled).
pub fn laplacian_2d(exec: &Executor, n: usize) -> Csr {
    let mut md = MatrixData::new(Dim::square(n * n));
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            md.add(row, row, 4.0).unwrap();
            if i > 0 {
                md.add(row, row - n, -1.0).unwrap();
            }
            if i + 1 < n {
                md.add(row, row + n, -1.0).unwrap();
            }
            if j > 0 {
                md.add(row, row - 1, -1.0).unwrap();
            }
            if j + 1 < n {
                md.add(row, row + 1, -1.0).unwrap();
            }
        }
    }
    Csr::read(exec, &md).unwrap()
}

/// Tridiagonal SPD pattern `[-1, 3, -1]` of order `n`, with entries
/// perturbed by `shift` so batch members differ.
pub fn tridiagonal(n: usize, shift: f64) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        t.push((i, i, 3.0 + shift));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
        }
    }
    t
}
