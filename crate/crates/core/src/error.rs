use thiserror::Error;

use crate::linalg::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("rank {rank} leaves no noise subspace for {sensors} sensors")]
    RankTooLarge { rank: usize, sensors: usize },
    #[error("noise eigenvalue tail is empty")]
    EmptyTail,
    #[error("eigenvalue {value:e} is not positive")]
    NonPositiveEigenvalue { value: f64 },
    #[error("sample covariance is singular: {snapshots} snapshots for {sensors} sensors")]
    SingularSampleCovariance { snapshots: usize, sensors: usize },
    #[error("order curve increases at rank {rank}")]
    OrderCurveNotMonotone { rank: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
