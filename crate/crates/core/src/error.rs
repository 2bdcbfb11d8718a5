use thiserror::Error;

/// Errors raised by the numerical layers and the verification runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds {bound:.3e})")]
    NotHermitian { asymmetry: f64, bound: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min:.3e}, floor {floor:.3e})")]
    NotPositiveDefinite { min: f64, floor: f64 },

    #[error("Hermitian eigensolver did not converge")]
    ConvergenceFailure,

    #[error("value {value:.6e} lies outside the domain {domain}")]
    DomainViolation { value: f64, domain: String },

    #[error("not a contraction: largest singular value {0:.6e}")]
    NotAContraction(f64),

    #[error("contraction is not invertible: smallest singular value {0:.3e}")]
    NotInvertible(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("trace has imaginary residue {imag:.3e} (scale {scale:.3e})")]
    ImaginaryResidue { imag: f64, scale: f64 },

    #[error("q = {0} is too close to 1 for this algebraic form")]
    QTooCloseToOne(f64),

    #[error("invalid q parameter: {0}")]
    InvalidQ(f64),

    #[error("trace constraint violated: expected {expected}, got {got}")]
    TraceConstraintViolation { expected: f64, got: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("matrices do not commute (commutator norm {norm:.3e}, bound {bound:.3e})")]
    CommutationViolation { norm: f64, bound: f64 },

    #[error("sum of H_j* H_j deviates from the identity by {0:.3e}")]
    PartitionOfIdentityViolation(f64),

    #[error("ordering hypothesis violated: {0}")]
    OrderingViolation(String),

    #[error("parameter violation: {0}")]
    ParameterViolation(String),

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("optimizer found no finite objective value")]
    OptimizerDidNotConverge,

    #[error("invalid sampler spec: {0}")]
    InvalidSpec(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fingerprint not produced by this library version: {0}")]
    FingerprintVersionMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
