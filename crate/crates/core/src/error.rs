// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not traceless (|tr| = {trace:e}) but SU mode was requested")]
    NonTracelessInSUMode { trace: f64 },
    #[error("Pauli strings {0} and {1} do not commute")]
    NotCommuting(String, String),
    #[error("stabilizer generators are not independent")]
    NotIndependent,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("delta too large: P*delta = {p_delta} must be < 1")]
    DeltaTooLarge { p_delta: f64 },
    #[error("metric {0} has no Hessian (not a smooth norm)")]
    NotSmoothMetric(String),
    #[error("operation undefined at the zero vector")]
    ZeroVector,
    #[error("eigenvalue gap {gap} is a nonzero multiple of 2*pi")]
    ResonantSpectrum { gap: f64 },
    #[error("point outside the coordinate patch: {0}")]
    OutsidePatch(String),
    #[error("unitary has an eigenvalue at -1 (eigenphase distance to pi = {distance:e})")]
    BranchCut { distance: f64 },
    #[error("metric tensor is singular (minimum eigenvalue {min_eigenvalue:e})")]
    SingularHessian { min_eigenvalue: f64 },
    #[error("step limit exceeded: {requested} > {limit}")]
    StepLimitExceeded { requested: usize, limit: usize },
    #[error("speed drifted by {drift:e} (tolerance {tolerance:e})")]
    SpeedDrift { drift: f64, tolerance: f64 },
    #[error("coefficient on {0} lies outside the stabilizer subgroup")]
    UnsupportedCoefficient(String),
    #[error("closest-vector search could not be certified within window {window}")]
    WindowTooSmall { window: i64 },
    #[error("n = {n} exceeds the configured limit {cap}")]
    DimensionLimit { n: usize, cap: usize },
    #[error("metric {0} is not supported by this operation")]
    UnsupportedSpec(String),
    #[error("gate Hamiltonian has F(H) = {value} > 1")]
    NotGBounding { value: f64 },
    #[error("penalty functions of the triple are inconsistent: {0}")]
    InconsistentPenalties(String),
    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),
    #[error("invalid penalty function: {0}")]
    InvalidPenalty(String),
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Variant name, as surfaced by the command-line tool.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonTracelessInSUMode { .. } => "NonTracelessInSUMode",
            Error::NotCommuting(..) => "NotCommuting",
            Error::NotIndependent => "NotIndependent",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DeltaTooLarge { .. } => "DeltaTooLarge",
            Error::NotSmoothMetric(_) => "NotSmoothMetric",
            Error::ZeroVector => "ZeroVector",
            Error::ResonantSpectrum { .. } => "ResonantSpectrum",
            Error::OutsidePatch(_) => "OutsidePatch",
            Error::BranchCut { .. } => "BranchCut",
            Error::SingularHessian { .. } => "SingularHessian",
            Error::StepLimitExceeded { .. } => "StepLimitExceeded",
            Error::SpeedDrift { .. } => "SpeedDrift",
            Error::UnsupportedCoefficient(_) => "UnsupportedCoefficient",
            Error::WindowTooSmall { .. } => "WindowTooSmall",
            Error::DimensionLimit { .. } => "DimensionLimit",
            Error::UnsupportedSpec(_) => "UnsupportedSpec",
            Error::NotGBounding { .. } => "NotGBounding",
            Error::InconsistentPenalties(_) => "InconsistentPenalties",
            Error::InvalidPauli(_) => "InvalidPauli",
            Error::InvalidPenalty(_) => "InvalidPenalty",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
