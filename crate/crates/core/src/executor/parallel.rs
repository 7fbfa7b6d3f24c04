use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use super::{axpby_row, gemm_row, spmv_row, CsrRef, ExecutorKind, Kernels, StridedMut, StridedRef};
use crate::error::{Error, Result};

/// Rows per reduction block. Fixed, so block boundaries do not move with the
/// number of workers.
const REDUCTION_BLOCK: usize = 1024;

/// Below this many rows, row loops run on the calling thread. The arithmetic
/// per row is the same either way.
const MIN_PARALLEL_ROWS: usize = 2048;

pub(super) struct ParallelBackend {
    workers: usize,
    pool: ThreadPool,
}

impl ParallelBackend {
    pub(super) fn new(workers: usize) -> Result<Self> {
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("spla-worker-{i}"))
            .build()
            .map_err(|e| Error::Configuration(format!("cannot start worker pool: {e}")))?;
        Ok(ParallelBackend { workers, pool })
    }

    pub(super) fn workers(&self) -> usize {
        self.workers
    }

    /// Applies `f(i, row_i)` to every row of `x`.
    fn rows<F>(&self, x: StridedMut<'_>, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        if x.is_empty() {
            return;
        }
        let (rows, cols, stride) = (x.rows, x.cols, x.stride);
        if rows < MIN_PARALLEL_ROWS {
            for (i, row) in x.data.chunks_mut(stride).take(rows).enumerate() {
                f(i, &mut row[..cols]);
            }
            return;
        }
        self.pool.install(|| {
            x.data
                .par_chunks_mut(stride)
                .take(rows)
                .enumerate()
                .with_min_len(256)
                .for_each(|(i, row)| f(i, &mut row[..cols]));
        });
    }
}

fn block_partial(x: &StridedRef<'_>, y: &StridedRef<'_>, block: usize) -> Vec<f64> {
    let start = block * REDUCTION_BLOCK;
    let end = (start + REDUCTION_BLOCK).min(x.rows);
    (0..x.cols)
        .map(|j| {
            let mut sum = 0.0;
            for i in start..end {
                sum += x.at(i, j) * y.at(i, j);
            }
            sum
        })
        .collect()
}

impl Kernels for ParallelBackend {
    fn kind(&self) -> ExecutorKind {
        ExecutorKind::Parallel
    }

    fn fill(&self, x: StridedMut<'_>, value: f64) -> Result<()> {
        self.rows(x, |_, row| row.fill(value));
        Ok(())
    }

    fn scale(&self, alpha: f64, x: StridedMut<'_>) -> Result<()> {
        self.rows(x, |_, row| row.iter_mut().for_each(|v| *v *= alpha));
        Ok(())
    }

    fn axpby(&self, alpha: f64, x: StridedRef<'_>, beta: f64, y: StridedMut<'_>) -> Result<()> {
        self.rows(y, |i, row| axpby_row(alpha, x.row(i), beta, row));
        Ok(())
    }

    fn diag_scale(&self, diag: &[f64], r: StridedRef<'_>, z: StridedMut<'_>) -> Result<()> {
        self.rows(z, |i, row| axpby_row(diag[i], r.row(i), 0.0, row));
        Ok(())
    }

    fn dot(&self, x: StridedRef<'_>, y: StridedRef<'_>, out: &mut [f64]) -> Result<()> {
        let out = &mut out[..x.cols];
        out.fill(0.0);
        if x.is_empty() {
            return Ok(());
        }
        let blocks = x.rows.div_ceil(REDUCTION_BLOCK);
        let partials: Vec<Vec<f64>> = if x.rows < MIN_PARALLEL_ROWS {
            (0..blocks).map(|b| block_partial(&x, &y, b)).collect()
        } else {
            self.pool.install(|| {
                (0..blocks)
                    .into_par_iter()
                    .map(|b| block_partial(&x, &y, b))
                    .collect()
            })
        };
        for partial in &partials {
            for (o, p) in out.iter_mut().zip(partial) {
                *o += p;
            }
        }
        Ok(())
    }

    fn csr_spmv(
        &self,
        alpha: f64,
        a: CsrRef<'_>,
        b: StridedRef<'_>,
        beta: f64,
        x: StridedMut<'_>,
    ) -> Result<()> {
        self.rows(x, |i, row| spmv_row(i, alpha, &a, &b, beta, row));
        Ok(())
    }

    fn dense_gemm(
        &self,
        alpha: f64,
        a: StridedRef<'_>,
        b: StridedRef<'_>,
        beta: f64,
        x: StridedMut<'_>,
    ) -> Result<()> {
        self.rows(x, |i, row| gemm_row(i, alpha, &a, &b, beta, row));
        Ok(())
    }

    fn copy_elements<T: Copy + Send + Sync>(&self, src: &[T], dst: &mut [T]) -> Result<()> {
        if src.len() < MIN_PARALLEL_ROWS {
            dst.copy_from_slice(src);
        } else {
            self.pool.install(|| {
                dst.par_chunks_mut(4096)
                    .zip(src.par_chunks(4096))
                    .for_each(|(d, s)| d.copy_from_slice(s));
            });
        }
        Ok(())
    }

    fn for_each_mut<T, F>(&self, items: &mut [T], f: F) -> Result<()>
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync,
    {
        self.pool.install(|| {
            items
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, item)| f(i, item));
        });
        Ok(())
    }
}
