//! CE and RCE structured covariance fits.
//!
//! Given the generalized eigenpairs `(lambda_i, u_i)` of `(R, W)` sorted
//! descending, the optimal rank-`P` model keeps `u_1..u_P` with powers
//! `lambda_i - sigma2` and pools `lambda_{P+1}..lambda_N` into the noise level:
//! the harmonic mean for CE, the arithmetic mean for RCE. The optimal
//! divergence is `xi * sum log(lambda_i / sigma2)` (CE) or
//! `xi * sum log(sigma2 / lambda_i)` (RCE) over the tail, which also equals
//! `xi (N - P) log(mean / geometric mean)` of the tail (inverted for CE).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::divergence::{field_factor, DivergenceValue};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{
    generalized_eig, GenEigenDecomposition, HermitianMatrix, LinalgError, Matrix, C64,
};
use crate::simulate::{SnapshotSet, SplitMix64};

/// Which orientation of the divergence is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Minimize `H(q_theta, p)`.
    Ce,
    /// Minimize `H(p, q_theta)`; coincides with maximum likelihood.
    Rce,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Ce => "ce",
            Criterion::Rce => "rce",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ce" => Ok(Criterion::Ce),
            "rce" => Ok(Criterion::Rce),
            other => Err(Error::InvalidInput(format!("unknown criterion '{other}'"))),
        }
    }
}

/// Relative gap below which `lambda_P` and `lambda_{P+1}` count as tied.
pub const UNIQUENESS_TOL: f64 = 1e-12;

/// Noise level from the discarded eigenvalues: harmonic mean (CE) or
/// arithmetic mean (RCE).
pub fn noise_variance(tail: &[f64], criterion: Criterion) -> Result<f64> {
    if tail.is_empty() {
        return Err(Error::EmptyTail);
    }
    if let Some(&value) = tail.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::NonPositiveEigenvalue { value });
    }
    let count = tail.len() as f64;
    Ok(match criterion {
        Criterion::Ce => count / tail.iter().map(|l| 1.0 / l).sum::<f64>(),
        Criterion::Rce => tail.iter().sum::<f64>() / count,
    })
}

/// Optimal divergence evaluated term by term from the tail and `sigma2`.
pub fn optimal_divergence(
    lambdas: &[f64],
    rank: usize,
    sigma2: f64,
    criterion: Criterion,
    is_real: bool,
) -> Result<DivergenceValue> {
    let tail = tail_of(lambdas, rank)?;
    let xi = field_factor(is_real);
    let sum: f64 = match criterion {
        Criterion::Ce => tail.iter().map(|l| (l / sigma2).ln()).sum(),
        Criterion::Rce => tail.iter().map(|l| (sigma2 / l).ln()).sum(),
    };
    Ok(DivergenceValue::new(xi * sum, xi))
}

/// The same optimum written as the log ratio of arithmetic to geometric mean
/// of the tail (of its reciprocals for CE).
pub fn divergence_mean_ratio_form(
    lambdas: &[f64],
    rank: usize,
    criterion: Criterion,
    is_real: bool,
) -> Result<DivergenceValue> {
    let tail = tail_of(lambdas, rank)?;
    if let Some(&value) = tail.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::NonPositiveEigenvalue { value });
    }
    let betas: Vec<f64> = match criterion {
        Criterion::Ce => tail.iter().map(|l| 1.0 / l).collect(),
        Criterion::Rce => tail.to_vec(),
    };
    let m = betas.len() as f64;
    let avg = betas.iter().sum::<f64>() / m;
    let log_geo = betas.iter().map(|b| b.ln()).sum::<f64>() / m;
    let xi = field_factor(is_real);
    Ok(DivergenceValue::new(xi * m * (avg.ln() - log_geo), xi))
}

fn tail_of(lambdas: &[f64], rank: usize) -> Result<&[f64]> {
    if rank >= lambdas.len() {
        return Err(Error::RankTooLarge {
            rank,
            sensors: lambdas.len(),
        });
    }
    Ok(&lambdas[rank..])
}

/// Fitted `R_theta = U diag(signal_powers) U^H + sigma2 W`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredModel {
    u: Matrix,
    signal_powers: Vec<f64>,
    sigma2: f64,
    noise: HermitianMatrix,
    r_theta: HermitianMatrix,
    criterion: Criterion,
    unique: bool,
    clamped: bool,
}

impl StructuredModel {
    /// Builds a model from explicit parameters. Hand-built models report
    /// `unique() == true` and `clamped() == false`.
    pub fn from_parts(
        u: Matrix,
        signal_powers: Vec<f64>,
        sigma2: f64,
        noise: HermitianMatrix,
        criterion: Criterion,
    ) -> Result<Self> {
        let n = noise.dim();
        if u.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: u.rows(),
            }
            .into());
        }
        if u.cols() != signal_powers.len() {
            return Err(Error::InvalidInput(format!(
                "{} signal vectors but {} powers",
                u.cols(),
                signal_powers.len()
            )));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidInput(format!(
                "noise level {sigma2} must be positive"
            )));
        }
        if signal_powers.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput(
                "signal powers must be nonnegative".into(),
            ));
        }
        let is_real = noise.is_real() && u.as_slice().iter().all(|z| z.im == 0.0);
        let r_theta = reconstruct(&u, &signal_powers, sigma2, &noise, is_real);
        Ok(Self {
            u,
            signal_powers,
            sigma2,
            noise,
            r_theta,
            criterion,
            unique: true,
            clamped: false,
        })
    }

    /// Model built from an arbitrary subset of generalized eigenvectors: the
    /// noise level pools the complementary eigenvalues and powers are
    /// `max(lambda_i - sigma2, 0)`.
    pub fn from_eigen_subset(
        decomposition: &GenEigenDecomposition,
        noise: &HermitianMatrix,
        indices: &[usize],
        criterion: Criterion,
    ) -> Result<Self> {
        let n = decomposition.dim();
        noise.ensure_dim(n)?;
        let tail: Vec<f64> = (0..n)
            .filter(|i| !indices.contains(i))
            .map(|i| decomposition.lambdas[i])
            .collect();
        let sigma2 = noise_variance(&tail, criterion)?;
        let columns: Vec<Vec<C64>> = indices
            .iter()
            .map(|&i| decomposition.vectors.column(i))
            .collect();
        let mut clamped = false;
        let powers = indices
            .iter()
            .map(|&i| {
                let p = decomposition.lambdas[i] - sigma2;
                if p < 0.0 {
                    clamped = true;
                    0.0
                } else {
                    p
                }
            })
            .collect();
        let mut model = Self::from_parts(
            Matrix::from_columns(n, &columns),
            powers,
            sigma2,
            noise.clone(),
            criterion,
        )?;
        model.clamped = clamped;
        Ok(model)
    }

    pub fn rank(&self) -> usize {
        self.signal_powers.len()
    }

    pub fn dim(&self) -> usize {
        self.noise.dim()
    }

    /// Retained generalized eigenvectors, `N x P`.
    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn signal_powers(&self) -> &[f64] {
        &self.signal_powers
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn noise(&self) -> &HermitianMatrix {
        &self.noise
    }

    pub fn r_theta(&self) -> &HermitianMatrix {
        &self.r_theta
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    /// `lambda_P > lambda_{P+1}`: the fitted covariance is unique.
    pub fn unique(&self) -> bool {
        self.unique
    }

    /// Some signal power came out negative and was clamped to zero.
    pub fn clamped(&self) -> bool {
        self.clamped
    }
}

fn reconstruct(
    u: &Matrix,
    powers: &[f64],
    sigma2: f64,
    noise: &HermitianMatrix,
    is_real: bool,
) -> HermitianMatrix {
    let n = noise.dim();
    let mut m = noise.as_matrix().scale(sigma2);
    for (k, &p) in powers.iter().enumerate() {
        for i in 0..n {
            let a = u[(i, k)] * p;
            for j in 0..n {
                m[(i, j)] += a * u[(j, k)].conj();
            }
        }
    }
    HermitianMatrix::symmetrized(m, is_real)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: StructuredModel,
    pub divergence: DivergenceValue,
    /// Full generalized spectrum, descending.
    pub lambdas: Vec<f64>,
    pub order_curve: Option<OrderScan>,
}

/// Fits a rank-`rank` structured model to `r` with known noise shape `w`.
pub fn fit(
    r: &HermitianMatrix,
    w: &HermitianMatrix,
    rank: usize,
    criterion: Criterion,
) -> Result<FitReport> {
    let n = w.dim();
    r.ensure_dim(n)?;
    if rank >= n {
        return Err(Error::RankTooLarge { rank, sensors: n });
    }
    let decomposition = generalized_eig(r, w)?;
    fit_with_decomposition(&decomposition, w, rank, criterion)
}

/// Fit from a precomputed decomposition of `(R, w)`.
pub fn fit_with_decomposition(
    decomposition: &GenEigenDecomposition,
    w: &HermitianMatrix,
    rank: usize,
    criterion: Criterion,
) -> Result<FitReport> {
    let n = decomposition.dim();
    w.ensure_dim(n)?;
    if rank >= n {
        return Err(Error::RankTooLarge { rank, sensors: n });
    }
    let lambdas = &decomposition.lambdas;
    let indices: Vec<usize> = (0..rank).collect();
    let mut model = StructuredModel::from_eigen_subset(decomposition, w, &indices, criterion)?;
    model.unique = is_unique(lambdas, rank);
    let divergence = optimal_divergence(
        lambdas,
        rank,
        model.sigma2,
        criterion,
        decomposition.is_real,
    )?;
    Ok(FitReport {
        model,
        divergence,
        lambdas: lambdas.clone(),
        order_curve: None,
    })
}

fn is_unique(lambdas: &[f64], rank: usize) -> bool {
    rank == 0 || lambdas[rank - 1] > lambdas[rank] + UNIQUENESS_TOL * lambdas[0]
}

/// Fits many independent `(R, W)` pairs with the same rank and criterion.
pub fn fit_batch(
    exec: Execution,
    problems: &[(HermitianMatrix, HermitianMatrix)],
    rank: usize,
    criterion: Criterion,
) -> Result<Vec<FitReport>> {
    exec.try_map(problems, |(r, w)| fit(r, w, rank, criterion))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderPoint {
    pub rank: usize,
    pub divergence_nats: f64,
    /// `K H_P / xi + P (2N - P) log(K) / 2`, when a snapshot count is known.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub penalized: Option<f64>,
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderScan {
    pub points: Vec<OrderPoint>,
    /// Rank minimizing the penalized criterion.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selected_rank: Option<usize>,
}

impl OrderScan {
    pub fn divergences(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.divergence_nats).collect()
    }
}

/// Minimum divergence for every rank `0..=max_rank` from one decomposition.
///
/// The penalty term is an MDL-style heuristic: `P (2N - P)` counts the real
/// parameters of a rank-`P` Hermitian signal part.
pub fn order_scan(
    r: &HermitianMatrix,
    w: &HermitianMatrix,
    criterion: Criterion,
    max_rank: usize,
    snapshots: Option<usize>,
) -> Result<OrderScan> {
    order_scan_with(Execution::default(), r, w, criterion, max_rank, snapshots)
}

pub fn order_scan_with(
    exec: Execution,
    r: &HermitianMatrix,
    w: &HermitianMatrix,
    criterion: Criterion,
    max_rank: usize,
    snapshots: Option<usize>,
) -> Result<OrderScan> {
    let n = w.dim();
    r.ensure_dim(n)?;
    if max_rank >= n {
        return Err(Error::RankTooLarge {
            rank: max_rank,
            sensors: n,
        });
    }
    let decomposition = generalized_eig(r, w)?;
    scan_decomposition(exec, &decomposition, criterion, max_rank, snapshots)
}

pub fn scan_decomposition(
    exec: Execution,
    decomposition: &GenEigenDecomposition,
    criterion: Criterion,
    max_rank: usize,
    snapshots: Option<usize>,
) -> Result<OrderScan> {
    let n = decomposition.dim();
    if max_rank >= n {
        return Err(Error::RankTooLarge {
            rank: max_rank,
            sensors: n,
        });
    }
    let lambdas = &decomposition.lambdas;
    let is_real = decomposition.is_real;
    let xi = field_factor(is_real);
    let points = exec
        .map_range(0..max_rank + 1, |p| {
            let h = divergence_mean_ratio_form(lambdas, p, criterion, is_real)?.value;
            let penalized = snapshots.map(|k| {
                let k = k as f64;
                k * h / xi + 0.5 * (p * (2 * n - p)) as f64 * k.ln()
            });
            Ok(OrderPoint {
                rank: p,
                divergence_nats: h,
                penalized,
                unique: is_unique(lambdas, p),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    for pair in points.windows(2) {
        let tol = 1e-12 * pair[0].divergence_nats.abs().max(1.0);
        if pair[1].divergence_nats > pair[0].divergence_nats + tol {
            return Err(Error::OrderCurveNotMonotone { rank: pair[1].rank });
        }
    }
    let selected_rank = if snapshots.is_some() {
        points
            .iter()
            .filter_map(|p| p.penalized.map(|j| (p.rank, j)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(rank, _)| rank)
    } else {
        None
    };
    Ok(OrderScan {
        points,
        selected_rank,
    })
}

/// Exact zero-mean Gaussian log-likelihood of `samples` under `cov`.
///
/// Real densities use `-(N log 2pi + log|R| + x^T R^{-1} x) / 2`; complex
/// circular densities use `-(N log pi + log|R| + x^H R^{-1} x)`.
pub fn log_likelihood(samples: &[Vec<C64>], cov: &HermitianMatrix) -> Result<f64> {
    let n = cov.dim();
    let chol = cov.cholesky()?;
    let log_det = chol.log_det();
    let (xi, log_norm) = if cov.is_real() {
        (0.5, (2.0 * std::f64::consts::PI).ln())
    } else {
        (1.0, std::f64::consts::PI.ln())
    };
    let mut total = 0.0;
    for x in samples {
        if x.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: x.len(),
            }
            .into());
        }
        let quad: f64 = chol.forward_solve(x).iter().map(|z| z.norm_sqr()).sum();
        total -= xi * (n as f64 * log_norm + log_det + quad);
    }
    Ok(total)
}

/// Outcome of comparing the RCE fit's likelihood against perturbed models.
#[derive(Debug, Clone, PartialEq)]
pub struct MlEquivalenceReport {
    pub model: StructuredModel,
    pub fitted_log_likelihood: f64,
    pub best_candidate_log_likelihood: f64,
    pub candidates: usize,
    pub rce_is_maximum: bool,
}

/// Minimum number of perturbed candidates evaluated.
pub const ML_MIN_CANDIDATES: usize = 100;

/// Fits the RCE model to the sample covariance and checks that no model in
/// a cloud of perturbed structured models has a higher exact likelihood.
///
/// Candidates perturb the noise level, each signal power, the choice of
/// eigenvector subset, and the signal vectors themselves. Perturbations are
/// drawn from a generator seeded by the snapshot set's seed.
pub fn ml_equivalence_check(
    snapshots: &SnapshotSet,
    w: &HermitianMatrix,
    rank: usize,
) -> Result<MlEquivalenceReport> {
    let n = snapshots.sample_cov().dim();
    if snapshots.len() < n {
        return Err(Error::SingularSampleCovariance {
            snapshots: snapshots.len(),
            sensors: n,
        });
    }
    let r = snapshots.sample_cov();
    let decomposition = generalized_eig(r, w)?;
    let report = fit_with_decomposition(&decomposition, w, rank, Criterion::Rce)?;
    let model = report.model;
    let data = snapshots.snapshots();
    let fitted = log_likelihood(data, model.r_theta())?;

    let candidates = perturbed_candidates(&model, &decomposition, w, snapshots.seed())?;
    let mut best = f64::NEG_INFINITY;
    for c in &candidates {
        best = best.max(log_likelihood(data, c.r_theta())?);
    }
    let tol = 1e-12 * fitted.abs().max(1.0);
    Ok(MlEquivalenceReport {
        rce_is_maximum: fitted >= best - tol,
        model,
        fitted_log_likelihood: fitted,
        best_candidate_log_likelihood: best,
        candidates: candidates.len(),
    })
}

fn perturbed_candidates(
    model: &StructuredModel,
    decomposition: &GenEigenDecomposition,
    w: &HermitianMatrix,
    seed: u64,
) -> Result<Vec<StructuredModel>> {
    const SIGMA_FACTORS: [f64; 16] = [
        0.5, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 1.005, 1.01, 1.02, 1.05, 1.1, 1.2, 1.5, 2.0,
    ];
    const POWER_FACTORS: [f64; 6] = [0.5, 0.9, 0.99, 1.01, 1.1, 2.0];
    let n = model.dim();
    let p = model.rank();
    let crit = model.criterion();
    let mut out = Vec::new();

    for f in SIGMA_FACTORS {
        out.push(StructuredModel::from_parts(
            model.u().clone(),
            model.signal_powers().to_vec(),
            model.sigma2() * f,
            w.clone(),
            crit,
        )?);
    }
    for i in 0..p {
        for f in POWER_FACTORS {
            let mut powers = model.signal_powers().to_vec();
            powers[i] *= f;
            out.push(StructuredModel::from_parts(
                model.u().clone(),
                powers,
                model.sigma2(),
                w.clone(),
                crit,
            )?);
        }
    }
    if p > 0 {
        for subset in combinations(n, p).into_iter().skip(1) {
            out.push(StructuredModel::from_eigen_subset(
                decomposition,
                w,
                &subset,
                crit,
            )?);
        }
    }

    let mut rng = SplitMix64::new(seed ^ 0xA5A5_5A5A_0F0F_F0F0);
    let is_real = w.is_real() && decomposition.is_real;
    let scales = [0.3, 0.1, 0.03, 0.01];
    let mut step = 0usize;
    while out.len() < ML_MIN_CANDIDATES {
        let eps = scales[step % scales.len()];
        step += 1;
        let sigma2 = model.sigma2() * (eps * rng.next_normal()).exp();
        if p == 0 {
            out.push(StructuredModel::from_parts(
                Matrix::zeros(n, 0),
                Vec::new(),
                sigma2,
                w.clone(),
                crit,
            )?);
            continue;
        }
        let mut u = model.u().clone();
        for j in 0..p {
            let col = u.column(j);
            let scale = eps * crate::linalg::norm(&col) / (n as f64).sqrt();
            let perturbed: Vec<C64> = col
                .iter()
                .map(|z| {
                    let re = rng.next_normal();
                    let im = if is_real { 0.0 } else { rng.next_normal() };
                    z + C64::new(re, im) * scale
                })
                .collect();
            u.set_column(j, &perturbed);
        }
        let powers = model
            .signal_powers()
            .iter()
            .map(|q| q * (eps * rng.next_normal()).exp())
            .collect();
        out.push(StructuredModel::from_parts(
            u,
            powers,
            sigma2,
            w.clone(),
            crit,
        )?);
    }
    Ok(out)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn recurse(
        start: usize,
        n: usize,
        k: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            recurse(i + 1, n, k, current, out);
            current.pop();
        }
    }
    recurse(0, n, k, &mut current, &mut out);
    out
}
