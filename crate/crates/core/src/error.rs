use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian: max |A - A^dag| = {violation:.3e} at ({row}, {col})")]
    NotHermitian { violation: f64, row: usize, col: usize },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("invalid quantum channel: {0}")]
    InvalidChannel(String),

    #[error("eigensolver did not converge within {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("matrix exponential overflow (norm {norm:.3e})")]
    ExpOverflow { norm: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("QEC conditions violated beyond tolerance: {0}")]
    ConditionsViolated(String),

    #[error("degenerate effective generator: eigengap {gap:.3e}")]
    DegenerateGenerator { gap: f64 },

    #[error("primal recovery infeasible at tolerance: residual {residual:.3e} after {rounds} rounds")]
    PrimalInfeasible { residual: f64, rounds: usize },

    #[error("duality check failed: primal {primal:.12} vs dual {dual:.12}")]
    DualityGap { primal: f64, dual: f64 },

    #[error("state lost positivity (min eigenvalue {min_eig:.3e}); reduce dt")]
    Negativity { min_eig: f64 },

    #[error("ill-conditioned least squares (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("oracle limited to span dimension <= 4, got {0}")]
    OracleTooLarge(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
