//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("matrix is not Hermitian: defect norm {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("spectral norm {norm} exceeds the unit bound")]
    NormExceedsOne { norm: f64 },

    #[error("unitarity defect {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("invalid block-encoding: {0}")]
    InvalidEncoding(String),

    #[error(
        "phase-factor solver did not converge: best residual {residual:.3e} \
         after {restarts} restarts (tolerance {tol:.1e})"
    )]
    SolverDidNotConverge {
        residual: f64,
        restarts: usize,
        tol: f64,
    },

    #[error("target polynomial violates a solver precondition: {0}")]
    InvalidTarget(String),

    #[error("certification failed: {0}")]
    CertificationFailed(String),

    #[error(
        "ill-posed mitigation regime: signal-to-noise factor {snr:.3e} is below {floor:.1e}; \
         the rescaled signal is too weak to recover"
    )]
    IllPosed { snr: f64, floor: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("post-selection budget exhausted after {attempts} attempts without success")]
    BudgetExhausted { attempts: u64 },

    #[error("spectrum violation: {0}")]
    SpectrumViolation(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
