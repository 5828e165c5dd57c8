//! Sparse linear solves for Newton steps.
//!
//! The Jacobian of the discretized operator is an unsymmetric sparse matrix
//! with at most `3^n` entries per row; problems stay small enough
//! (grids up to ~260^2) that a direct sparse LU is the robust choice. A
//! factorization is kept around per Newton iteration so that line-search
//! trials can re-solve cheaply.

use faer::prelude::SpSolver;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::SparseColMat;

use crate::error::{Error, Result};

/// Factory for LU factorizations of same-sized systems.
pub struct StencilSolver {
    n: usize,
}

/// A numeric LU factorization usable for repeated solves.
pub struct Factor {
    n: usize,
    lu: Lu<usize, f64>,
}

impl StencilSolver {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Factorizes the matrix given as (row, col, value) triplets.
    pub fn factor(&mut self, triplets: &[(usize, usize, f64)]) -> Result<Factor> {
        let mat = SparseColMat::try_new_from_triplets(self.n, self.n, triplets)
            .map_err(|e| Error::Numerics(format!("jacobian assembly failed: {e:?}")))?;
        // The backend panics on structurally singular input; surface that as
        // an error like any other singular matrix.
        let lu = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| mat.sp_lu()))
            .map_err(|_| Error::Solver("sparse LU panicked (structurally singular Jacobian)".into()))?
            .map_err(|e| Error::Solver(format!("sparse LU failed (singular Jacobian?): {e:?}")))?;
        Ok(Factor { n: self.n, lu })
    }
}

impl Factor {
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::GridMismatch(format!(
                "rhs length {} != system size {}",
                b.len(),
                self.n
            )));
        }
        let rhs = faer::Mat::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(
                "linear solve produced non-finite values".into(),
            ));
        }
        Ok(out)
    }
}

/// One-shot solve of `A x = b`.
pub fn solve_sparse(n: usize, triplets: &[(usize, usize, f64)], b: &[f64]) -> Result<Vec<f64>> {
    StencilSolver::new(n).factor(triplets)?.solve(b)
}
