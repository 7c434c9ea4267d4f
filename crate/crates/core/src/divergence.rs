//! Closed-form Kullback divergence between Gaussian densities.
//!
//! `H(p1, p2) = xi { tr(S2^{-1} S1) - N - log|S2^{-1} S1| + d^H S2^{-1} d }`
//! with `d = m1 - m2` and `xi = 1/2` for real data, `1` for complex data.
//! The cross-entropy criterion evaluates `H(q_theta, p)`; the reverse
//! criterion evaluates `H(p, q_theta)`.

use crate::error::{Error, Result};
use crate::estimator::{Criterion, StructuredModel};
use crate::linalg::{HermitianMatrix, LinalgError, Matrix, C64};

/// Reporting tolerance below zero before a value is considered negative.
pub const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDensity {
    mean: Vec<C64>,
    cov: HermitianMatrix,
}

impl GaussianDensity {
    pub fn new(mean: Vec<C64>, cov: HermitianMatrix) -> Result<Self> {
        cov.ensure_dim(mean.len())?;
        Ok(Self { mean, cov })
    }

    pub fn zero_mean(cov: HermitianMatrix) -> Self {
        Self {
            mean: vec![C64::new(0.0, 0.0); cov.dim()],
            cov,
        }
    }

    pub fn mean(&self) -> &[C64] {
        &self.mean
    }

    pub fn cov(&self) -> &HermitianMatrix {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// A divergence in nats together with the field factor used to compute it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub xi: f64,
}

impl DivergenceValue {
    /// Clamps rounding noise in `[-NEGATIVE_TOL, 0)` to zero.
    pub(crate) fn new(value: f64, xi: f64) -> Self {
        let value = if (-NEGATIVE_TOL..0.0).contains(&value) {
            0.0
        } else {
            value
        };
        Self { value, xi }
    }
}

/// `1/2` for real-valued data, `1` for complex.
pub fn field_factor(is_real: bool) -> f64 {
    if is_real {
        0.5
    } else {
        1.0
    }
}

fn gaussian_kl(p1: &GaussianDensity, p2: &GaussianDensity) -> Result<DivergenceValue> {
    let n = p2.dim();
    if p1.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: p1.dim(),
        }
        .into());
    }
    let l2 = p2.cov.cholesky()?;
    let l1 = p1.cov.cholesky()?;
    let whitened = l2.whiten(&p1.cov);
    let trace: f64 = whitened.diagonal_values().iter().sum();
    let log_det_ratio = l1.log_det() - l2.log_det();
    let d: Vec<C64> = p1.mean.iter().zip(&p2.mean).map(|(a, b)| a - b).collect();
    let mahalanobis: f64 = l2.forward_solve(&d).iter().map(|z| z.norm_sqr()).sum();
    let xi = field_factor(p1.cov.is_real() && p2.cov.is_real());
    Ok(DivergenceValue::new(
        xi * (trace - n as f64 - log_det_ratio + mahalanobis),
        xi,
    ))
}

/// `H(q, p)`: cross-entropy of the model `q` against the reference `p`.
pub fn ce_divergence(q: &GaussianDensity, p: &GaussianDensity) -> Result<DivergenceValue> {
    gaussian_kl(q, p)
}

/// `H(p, q)`: reverse cross-entropy of the reference `p` against the model `q`.
pub fn rce_divergence(p: &GaussianDensity, q: &GaussianDensity) -> Result<DivergenceValue> {
    gaussian_kl(p, q)
}

/// Zero-mean divergence between an observed covariance and a model
/// covariance, oriented by `criterion`.
pub fn criterion_divergence(
    observed: &HermitianMatrix,
    model: &HermitianMatrix,
    criterion: Criterion,
) -> Result<DivergenceValue> {
    let p = GaussianDensity::zero_mean(observed.clone());
    let q = GaussianDensity::zero_mean(model.clone());
    match criterion {
        Criterion::Ce => ce_divergence(&q, &p),
        Criterion::Rce => rce_divergence(&p, &q),
    }
}

/// `d(A^{-1}) = -A^{-1} dA A^{-1}` for a perturbation direction `dA`.
pub fn inverse_derivative(a: &HermitianMatrix, direction: &Matrix) -> Result<Matrix> {
    let inv = a.inverse()?;
    Ok((&(inv.as_matrix() * direction) * inv.as_matrix()).scale(-1.0))
}

/// Largest stationarity violation per parameter block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityResiduals {
    /// `|tr(M W)|`, the noise-level derivative.
    pub noise: f64,
    /// `max |(M V)_ij|` with `V = U diag(signal_powers)^{1/2}`.
    pub signal: f64,
}

impl StationarityResiduals {
    pub fn max(&self) -> f64 {
        self.noise.max(self.signal)
    }
}

/// Evaluates the first-order optimality conditions at `model`.
///
/// `M = R^{-1} - R_theta^{-1}` for CE and
/// `M = R_theta^{-1} R R_theta^{-1} - R_theta^{-1}` for RCE; a stationary
/// point has `M V = 0` and `tr(M W) = 0`.
pub fn stationarity_residuals(
    r: &HermitianMatrix,
    model: &StructuredModel,
    criterion: Criterion,
) -> Result<StationarityResiduals> {
    let n = r.dim();
    model.r_theta().ensure_dim(n)?;
    let r_theta_inv = model.r_theta().inverse()?;
    let m = match criterion {
        Criterion::Ce => {
            let r_inv = r.inverse()?;
            r_inv.as_matrix() - r_theta_inv.as_matrix()
        }
        Criterion::Rce => {
            let sandwich = &(r_theta_inv.as_matrix() * r.as_matrix()) * r_theta_inv.as_matrix();
            &sandwich - r_theta_inv.as_matrix()
        }
    };
    let noise = (&m * model.noise().as_matrix()).trace().norm();
    let roots: Vec<f64> = model
        .signal_powers()
        .iter()
        .map(|p| p.max(0.0).sqrt())
        .collect();
    let v = Matrix::from_fn(n, model.rank(), |i, j| model.u()[(i, j)] * roots[j]);
    let signal = if model.rank() == 0 {
        0.0
    } else {
        (&m * &v).max_abs()
    };
    if !noise.is_finite() || !signal.is_finite() {
        return Err(Error::InvalidInput(
            "non-finite stationarity residual".into(),
        ));
    }
    Ok(StationarityResiduals { noise, signal })
}
