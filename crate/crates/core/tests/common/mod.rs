#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spla_core::{Csr, Dim, Executor, MatrixData};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense row-major matrix with entries uniform in [-1, 1] kept with
/// probability `density`.
pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Vec<f64> {
    (0..rows * cols)
        .map(|_| {
            if rng.gen::<f64>() < density {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect()
}

pub fn csr_from_dense(exec: &Executor, rows: usize, cols: usize, dense: &[f64]) -> Csr {
    let mut md = MatrixData::new(Dim::new(rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            let v = dense[i * cols + j];
            if v != 0.0 {
                md.add(i, j, v).unwrap();
            }
        }
    }
    Csr::read(exec, &md).unwrap()
}

/// `M^T M + n I` for a random `M`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let m = random_dense(rng, n, n, 1.0);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += m[k * n + i] * m[k * n + j];
            }
            a[i * n + j] = s + if i == j { n as f64 } else { 0.0 };
        }
    }
    a
}

/// Random nonsymmetric matrix with a dominant diagonal.
pub fn random_nonsymmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut a = random_dense(rng, n, n, 1.0);
    for i in 0..n {
        a[i * n + i] += n as f64;
    }
    a
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Triple-loop oracle: `A * B` for row-major dense operands.
pub fn dense_matmul(a: &[f64], rows: usize, inner: usize, b: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let mut s = 0.0;
            for l in 0..inner {
                s += a[i * inner + l] * b[l * cols + j];
            }
            out[i * cols + j] = s;
        }
    }
    out
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖b - A x‖₂` computed densely.
pub fn residual_norm(a: &[f64], n: usize, x: &[f64], b: &[f64]) -> f64 {
    let ax = dense_matmul(a, n, n, x, 1);
    norm(
        &b.iter()
            .zip(&ax)
            .map(|(bi, ai)| bi - ai)
            .collect::<Vec<_>>(),
    )
}
