//! Cyclic Jacobi eigensolver for dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the usual real symmetric Jacobi rotation. Sweeps run
//! until the off-diagonal Frobenius norm drops below `OFF_DIAGONAL_TOL * ||A||_F`.

use super::matrix::{HermitianMatrix, Matrix, C64};
use super::LinalgError;

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
/// Eigenvalues closer than this (relative to the largest magnitude) are
/// treated as tied when ordering.
const TIE_TOL: f64 = 1e-12;

/// Eigenvalues in descending order with orthonormal eigenvector columns.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl HermitianMatrix {
    pub fn eig(&self) -> Result<HermitianEigen, LinalgError> {
        hermitian_eig(self)
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

pub fn hermitian_eig(a: &HermitianMatrix) -> Result<HermitianEigen, LinalgError> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    let target = OFF_DIAGONAL_TOL * scale;

    let mut converged = off_diagonal_norm(&m) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&m) <= target;
    }

    let values: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    Ok(order_eigenpairs(values, v))
}

fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let g = m[(p, q)];
    let ag = g.norm();
    if ag == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = g / ag;
    let tau = (aqq - app) / (2.0 * ag);
    let t = if tau.is_infinite() {
        0.0
    } else {
        let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
        sign / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = m.rows();

    // A <- A V with V = diag-phase * real rotation on (p, q).
    let pc = phase.conj();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c - pc * akq * s;
        m[(k, q)] = akp * s + pc * akq * c;
    }
    // A <- V^H A
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c - phase * aqk * s;
        m[(q, k)] = apk * s + phase * aqk * c;
    }
    m[(p, p)] = C64::new(app - t * ag, 0.0);
    m[(q, q)] = C64::new(aqq + t * ag, 0.0);
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - pc * vkq * s;
        v[(k, q)] = vkp * s + pc * vkq * c;
    }
}

/// Index of the largest-magnitude entry; the lowest index wins ties.
fn dominant_index(column: &[C64]) -> usize {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in column.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best = i;
            best_mag = mag;
        }
    }
    best
}

/// Sorts descending, breaks ties on the dominant component index and fixes the
/// phase so the dominant component is real and positive.
fn order_eigenpairs(values: Vec<f64>, vectors: Matrix) -> HermitianEigen {
    let n = values.len();
    let mut columns: Vec<(f64, usize, Vec<C64>)> = (0..n)
        .map(|j| {
            let mut col = vectors.column(j);
            let k = dominant_index(&col);
            let mag = col[k].norm();
            if mag > 0.0 {
                let rot = col[k].conj() / mag;
                col.iter_mut().for_each(|z| *z *= rot);
                col[k] = C64::new(col[k].re, 0.0);
            }
            (values[j], k, col)
        })
        .collect();

    columns.sort_by(|a, b| b.0.total_cmp(&a.0));
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = TIE_TOL * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && columns[start].0 - columns[end].0 <= tol {
            end += 1;
        }
        columns[start..end].sort_by_key(|c| c.1);
        start = end;
    }

    let mut out = Matrix::zeros(n, n);
    let mut sorted = Vec::with_capacity(n);
    for (j, (val, _, col)) in columns.into_iter().enumerate() {
        sorted.push(val);
        out.set_column(j, &col);
    }
    HermitianEigen {
        values: sorted,
        vectors: out,
    }
}
