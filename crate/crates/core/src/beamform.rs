//! Classical and minimum-variance (MVDR) beamformers.
//!
//! All inner products are Hermitian: the classical output power is
//! `w0^H C w0` and the MVDR weights are
//! `w = C^{-1} w0 / (w0^H C^{-1} w0)`, for `C` either the observed `R` or the
//! structured `R_theta`. For `w0` in the span of `R^{-1} U` (classical) or of
//! `U` (MVDR) the two covariances give identical results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{dot, norm, HermitianMatrix, LinalgError, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    w0: Vec<C64>,
    label: String,
}

impl SteeringVector {
    pub fn new(w0: Vec<C64>, label: impl Into<String>) -> Self {
        Self {
            w0,
            label: label.into(),
        }
    }

    pub fn w0(&self) -> &[C64] {
        &self.w0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.w0.len()
    }

    fn check(&self, cov: &HermitianMatrix) -> Result<()> {
        cov.ensure_dim(self.dim()).map_err(|_| {
            Error::from(LinalgError::DimensionMismatch {
                expected: cov.dim(),
                found: self.dim(),
            })
        })?;
        if !(norm(&self.w0) > 0.0) {
            return Err(Error::InvalidInput(format!(
                "steering vector '{}' is zero",
                self.label
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamformerKind {
    Classical,
    Mvdr,
}

/// Which covariance the weights were designed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceSource {
    #[serde(rename = "R")]
    Observed,
    #[serde(rename = "R_theta")]
    Structured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerWeights {
    pub w: Vec<C64>,
    pub kind: BeamformerKind,
    pub source: CovarianceSource,
}

impl BeamformerWeights {
    /// `w^H C w`.
    pub fn output_power(&self, cov: &HermitianMatrix) -> f64 {
        cov.quadratic_form(&self.w)
    }
}

/// Expected received power `w0^H C w0`.
pub fn classical_power(cov: &HermitianMatrix, w0: &SteeringVector) -> Result<f64> {
    cov.ensure_dim(w0.dim())?;
    Ok(cov.quadratic_form(w0.w0()))
}

/// Minimum-variance weights with unit response toward `w0`.
pub fn mvdr_weights(
    cov: &HermitianMatrix,
    w0: &SteeringVector,
    source: CovarianceSource,
) -> Result<BeamformerWeights> {
    w0.check(cov)?;
    let chol = cov.cholesky()?;
    let cinv_w0 = chol.solve(w0.w0());
    let gain = dot(w0.w0(), &cinv_w0);
    let w = cinv_w0.into_iter().map(|z| z / gain).collect();
    Ok(BeamformerWeights {
        w,
        kind: BeamformerKind::Mvdr,
        source,
    })
}

/// `C^{-1} w0` through a Cholesky solve.
pub fn whitened_response(cov: &HermitianMatrix, w0: &SteeringVector) -> Result<Vec<C64>> {
    w0.check(cov)?;
    Ok(cov.cholesky()?.solve(w0.w0()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamPoint {
    pub label: String,
    pub classical: f64,
    /// MVDR output power `1 / (w0^H C^{-1} w0)`.
    pub mvdr: f64,
}

pub fn beampattern(cov: &HermitianMatrix, family: &[SteeringVector]) -> Result<Vec<BeamPoint>> {
    beampattern_with(Execution::default(), cov, family)
}

/// Sweeps `family`, keeping the input order.
pub fn beampattern_with(
    exec: Execution,
    cov: &HermitianMatrix,
    family: &[SteeringVector],
) -> Result<Vec<BeamPoint>> {
    if family.is_empty() {
        return Err(Error::InvalidInput("steering family is empty".into()));
    }
    for s in family {
        s.check(cov)?;
    }
    let chol = cov.cholesky()?;
    exec.try_map(family, |s| {
        let gain = dot(s.w0(), &chol.solve(s.w0())).re;
        Ok(BeamPoint {
            label: s.label.clone(),
            classical: cov.quadratic_form(s.w0()),
            mvdr: 1.0 / gain,
        })
    })
}
