//! Poisson problem `-Δu = f` on the unit square, solved through the facade.
//!
//! Uses the 5-point stencil on an `n x n` interior grid with `h = 1/(n+1)`
//! and the manufactured solution `u = sin(πx) sin(πy)`.

use std::f64::consts::PI;

use spla_core::facade::{create_solver, AppMatrix, AppVector, FacadeError, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct HeatReport {
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm error against the exact solution at the grid points.
    pub max_error: f64,
    /// `‖f - A u‖ / ‖f‖` recomputed on the application side.
    pub relative_residual: f64,
    pub solution: Vec<f64>,
}

pub fn laplacian(n: usize) -> AppMatrix {
    let h2 = ((n + 1) as f64).powi(2);
    let idx = |i: usize, j: usize| i * n + j;
    let mut a = AppMatrix::new(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let row = idx(i, j);
            a.insert(row, row, 4.0 * h2);
            if i > 0 {
                a.insert(row, idx(i - 1, j), -h2);
            }
            if i + 1 < n {
                a.insert(row, idx(i + 1, j), -h2);
            }
            if j > 0 {
                a.insert(row, idx(i, j - 1), -h2);
            }
            if j + 1 < n {
                a.insert(row, idx(i, j + 1), -h2);
            }
        }
    }
    a
}

fn exact(n: usize) -> Vec<f64> {
    let h = 1.0 / (n + 1) as f64;
    (0..n * n)
        .map(|p| {
            let (x, y) = ((p / n + 1) as f64 * h, (p % n + 1) as f64 * h);
            (PI * x).sin() * (PI * y).sin()
        })
        .collect()
}

/// Solves on an `n x n` grid with CG + Jacobi. `workers` only matters for
/// the parallel backend.
pub fn heat_demo(
    n: usize,
    backend: &str,
    workers: Option<usize>,
) -> Result<HeatReport, FacadeError> {
    if n < 2 {
        return Err(FacadeError::InvalidArgument(format!(
            "grid size {n} is below 2"
        )));
    }
    let a = laplacian(n);
    let u_star = exact(n);
    let f: Vec<f64> = u_star.iter().map(|u| 2.0 * PI * PI * u).collect();
    let options = SolverOptions {
        algorithm: "cg".into(),
        max_iters: 10 * n * n,
        reduction_factor: 1e-10,
        wrap_in_gmres: false,
        preconditioner: "jacobi".into(),
    };
    let solver = create_solver(backend, workers, &a, options)?;
    let b = AppVector::from_column(f.clone());
    let mut u = AppVector::new(n * n, 1);
    let stats = solver.solve(&b, &mut u)?;

    let au = a.multiply(u.data());
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let relative_residual =
        norm(&mut f.iter().zip(&au).map(|(p, q)| p - q)) / norm(&mut f.iter().copied());
    let max_error = u
        .data()
        .iter()
        .zip(&u_star)
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    Ok(HeatReport {
        n,
        iterations: stats.iterations,
        converged: stats.converged,
        max_error,
        relative_residual,
        solution: u.data().to_vec(),
    })
}
