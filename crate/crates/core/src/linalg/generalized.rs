use super::matrix::{HermitianMatrix, Matrix};
use super::LinalgError;

/// Generalized eigenpairs of the pencil `(R, W)`: `lambda_i R^{-1} u_i = W^{-1} u_i`.
///
/// Eigenvalues are sorted descending and the vectors satisfy
/// `u_i^H W^{-1} u_j = delta_ij`. `whitened_vectors` holds the orthonormal
/// eigenvectors `t_i` of `L^{-1} R L^{-H}` (with `W = L L^H`), and
/// `u_i = L t_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenEigenDecomposition {
    pub lambdas: Vec<f64>,
    pub vectors: Matrix,
    pub whitened_vectors: Matrix,
    pub is_real: bool,
}

impl GenEigenDecomposition {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// The first `count` generalized eigenvectors as an `N x count` matrix.
    pub fn leading_vectors(&self, count: usize) -> Matrix {
        self.vectors.leading_columns(count)
    }
}

pub fn generalized_eig(
    r: &HermitianMatrix,
    w: &HermitianMatrix,
) -> Result<GenEigenDecomposition, LinalgError> {
    let n = w.dim();
    r.ensure_dim(n)?;
    // R must itself be PD for the pencil to carry positive eigenvalues.
    r.cholesky()?;
    let l = w.cholesky()?;
    let whitened = l.whiten(r);
    let eig = whitened.eig()?;

    let mut vectors = Matrix::zeros(n, n);
    for j in 0..n {
        vectors.set_column(j, &l.mul_vec(&eig.vectors.column(j)));
    }
    Ok(GenEigenDecomposition {
        lambdas: eig.values,
        vectors,
        whitened_vectors: eig.vectors,
        is_real: r.is_real() && w.is_real(),
    })
}
