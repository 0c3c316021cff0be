use thiserror::Error;

/// Errors produced by the linear-algebra, channel, and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label `{0}` appears more than once")]
    LabelCollision(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("operator is not Hermitian (|A - A^H|_F = {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("partial trace over `{label}` is not the identity (|Tr - 1|_F = {residual:e})")]
    NotTracePreserving { label: String, residual: f64 },
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error(
        "Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:e})"
    )]
    EigenNoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error(
        "alternating projection did not converge: psd residual {psd:e}, trace residual {trace:e}"
    )]
    ProjectionNoConvergence { psd: f64, trace: f64 },
    #[error("linear maximization did not converge: bracket [{lower}, {upper}]")]
    LinearMaxNoConvergence { lower: f64, upper: f64 },
    #[error("dual candidate has operator norm {0} > 1")]
    DualInfeasible(f64),
    #[error("l1 fast path not applicable: {0}")]
    NotApplicable(String),
    #[error("unsupported dimensions: {0}")]
    UnsupportedDimensions(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
