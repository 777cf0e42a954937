use thiserror::Error;

/// Errors raised by the discretization, solver and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid cell edge {0}: must be finite and positive")]
    InvalidCell(f64),

    #[error("invalid cutoff {0}: must be at least 1")]
    InvalidCutoff(i64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid charge configuration: {0}")]
    InvalidCharge(String),

    #[error("degenerate configuration: charges {0} and {1} coincide modulo the lattice")]
    DegenerateConfiguration(usize, usize),

    #[error("smooth potential is not Hermitian at k = {0:?}")]
    NonHermitianPotential([i32; 3]),

    #[error("dense oracle limited to {limit} basis functions, got {size}")]
    OracleScale { size: usize, limit: usize },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error(
        "eigensolver did not converge in {iterations} iterations (best residuals {residuals:?})"
    )]
    NotConverged {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("wave function vanishes at anchor ({value:e}); choose another anchor")]
    VanishingAnchor { value: f64 },

    #[error("eigenvector is not phase-normalized: imaginary point value {0:e}")]
    PhaseNotNormalized(f64),

    #[error("divergent lattice sum: exponent {0} must exceed 3")]
    DivergentSum(i32),

    #[error("empty shell [{0}, {1})")]
    EmptyShell(f64, f64),

    #[error("configurations do not match: {0}")]
    ConfigMismatch(String),

    #[error("cutoff grids are not aligned: {0}")]
    Alignment(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
