//! Validated local unitaries.

use crate::error::{Error, Result};
use crate::linalg::{eye, require_unitary, CMatrix};
use crate::scalar::Float;

/// Unitary gate on `k` sites, stored as a dense 2^k × 2^k matrix.
///
/// Row-major index convention: the first site a gate is applied to is
/// the most significant bit of the matrix row/column index.
#[derive(Debug, Clone)]
pub struct LocalUnitary<T: Float> {
    arity: usize,
    matrix: CMatrix<T>,
}

impl<T: Float> LocalUnitary<T> {
    /// Wraps a matrix, validating shape (power-of-two square) and
    /// unitarity within 1e-10.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n || !n.is_power_of_two() {
            return Err(Error::config(format!(
                "gate matrix must be square with power-of-two side, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        require_unitary(&matrix, 1e-10, "local unitary")?;
        Ok(LocalUnitary { arity: n.trailing_zeros() as usize, matrix })
    }

    /// Identity gate on `arity` sites.
    pub fn identity(arity: usize) -> Self {
        LocalUnitary { arity, matrix: eye(1 << arity) }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Inverse gate (conjugate transpose).
    pub fn adjoint(&self) -> Self {
        LocalUnitary { arity: self.arity, matrix: self.matrix.adjoint() }
    }
}
