//! Structured covariance fitting by minimum cross-entropy.
//!
//! Fits `R_theta = U diag(signal_powers) U^H + sigma2 W` to an observed
//! covariance `R` under either the cross-entropy (CE) or reverse
//! cross-entropy (RCE) criterion. Both optima come out of the generalized
//! eigendecomposition of the pencil `(R, W)`: keep the top `P` eigenvectors,
//! pool the remaining eigenvalues into the noise level (harmonic mean for CE,
//! arithmetic mean for RCE).
//!
//! Modules:
//! - [`linalg`]: Cholesky, Jacobi eigensolver, generalized eigenproblem.
//! - [`divergence`]: closed-form Gaussian divergences and stationarity residuals.
//! - [`estimator`]: the fit itself, order scans and the ML cross-check.
//! - [`beamform`]: classical and MVDR beamformers on `R` or `R_theta`.
//! - [`simulate`]: seeded narrowband array snapshots.
//! - [`exec`]: parallel/sequential execution switch for batch workloads.
//! - [`io`] and [`cli`]: file formats and the `covfit` command line.

pub mod beamform;
pub mod cli;
pub mod divergence;
pub mod estimator;
pub mod exec;
pub mod io;
pub mod linalg;
pub mod simulate;

mod error;

pub use error::{Error, Result};
pub use estimator::Criterion;
pub use exec::Execution;
pub use linalg::{HermitianMatrix, Matrix, C64};
