use crate::container::Dim;
use crate::error::{Error, Result};
use crate::executor::Executor;
use crate::linop::{Csr, Dense, LinOp};

/// Diagonal (Jacobi) preconditioner: `z = D⁻¹ r`.
#[derive(Debug, Clone)]
pub struct Jacobi {
    exec: Executor,
    inv_diag: Vec<f64>,
}

impl Jacobi {
    /// Extracts and inverts the diagonal. Every diagonal entry must be
    /// stored and nonzero.
    pub fn generate(matrix: &Csr) -> Result<Self> {
        let size = matrix.size();
        if !size.is_square() {
            return Err(Error::InvalidArgument(format!(
                "Jacobi needs a square matrix, got {size}"
            )));
        }
        let inv_diag = matrix
            .diagonal()
            .into_iter()
            .enumerate()
            .map(|(row, d)| match d {
                Some(v) if v != 0.0 && v.is_finite() => Ok(1.0 / v),
                _ => Err(Error::SingularPreconditioner { row }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Jacobi {
            exec: matrix.executor().clone(),
            inv_diag,
        })
    }

    pub fn inverse_diagonal(&self) -> &[f64] {
        &self.inv_diag
    }
}

impl LinOp for Jacobi {
    fn size(&self) -> Dim {
        Dim::square(self.inv_diag.len())
    }

    fn executor(&self) -> &Executor {
        &self.exec
    }

    fn apply_impl(&self, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<()> {
        x.diag_scale_from(&self.inv_diag, b)
    }
}
