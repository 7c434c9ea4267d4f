use super::matrix::{HermitianMatrix, Matrix, C64};
use super::LinalgError;

/// Pivot floor, relative to `n * max_diag`.
const PIVOT_TOL: f64 = 1e-14;

/// Lower-triangular `L` with `L L^H = A`.
///
/// Inverse application goes through triangular solves; `A^{-1/2}` is never
/// formed.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerTriangularFactor {
    l: Matrix,
}

impl HermitianMatrix {
    pub fn cholesky(&self) -> Result<LowerTriangularFactor, LinalgError> {
        cholesky_sqrt(self)
    }
}

pub fn cholesky_sqrt(a: &HermitianMatrix) -> Result<LowerTriangularFactor, LinalgError> {
    let n = a.dim();
    let m = a.as_matrix();
    let max_diag = a.diagonal_values().into_iter().fold(0.0, f64::max);
    let floor = n as f64 * PIVOT_TOL * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > floor) {
            return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(LowerTriangularFactor { l })
}

impl LowerTriangularFactor {
    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L y = b`.
    pub fn forward_solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)].re;
        }
        y
    }

    /// Solves `L^H x = y`.
    pub fn backward_solve_adjoint(&self, y: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(y.len(), n);
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)].conj() * x[k];
            }
            x[i] = s / self.l[(i, i)].re;
        }
        x
    }

    /// Solves `A x = b` for the factored `A`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        self.backward_solve_adjoint(&self.forward_solve(b))
    }

    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            out.set_column(j, &self.solve(&b.column(j)));
        }
        out
    }

    /// `L x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        self.l.mul_vec(x)
    }

    /// `L^{-1} B` column by column.
    pub fn forward_solve_matrix(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            out.set_column(j, &self.forward_solve(&b.column(j)));
        }
        out
    }

    /// `L^{-1} B L^{-H}` for Hermitian `B`.
    pub fn whiten(&self, b: &HermitianMatrix) -> HermitianMatrix {
        // (L^{-1} B)^H = B L^{-H}, so a second forward solve on the adjoint
        // finishes the congruence.
        let half = self.forward_solve_matrix(b.as_matrix());
        let full = self.forward_solve_matrix(&half.adjoint());
        HermitianMatrix::symmetrized(full, b.is_real())
    }

    /// `log |A|` from the pivots.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.l[(i, i)].re.ln()).sum::<f64>()
    }
}
