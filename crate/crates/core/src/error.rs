use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("spectral radius {radius} is not below 1 - {margin}; the series does not converge")]
    SpectralRadius { radius: f64, margin: f64 },

    #[error("function is undefined at eigenvalue {at}")]
    FunctionUndefined { at: f64 },

    #[error("system is degenerate: {0}")]
    DegenerateSystem(&'static str),

    #[error("system does not span the space (rank {rank} < dim {dim})")]
    NotAFrame { rank: usize, dim: usize },

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("vector must have unit norm (norm = {norm})")]
    NotUnit { norm: f64 },

    #[error("operator is not Hermitian (defect {defect})")]
    NotHermitian { defect: f64 },

    #[error("generator is not cyclic: {0}")]
    NotCyclic(String),

    #[error("operator is singular (smallest singular value {sigma_min})")]
    SingularOperator { sigma_min: f64 },

    #[error("perturbation parameters are not admissible: max(l1 + mu/sqrt(A), l2) = {value} >= 1")]
    Admissibility { value: f64 },

    #[error("parameter {name} = {value} outside the open interval (0, 1)")]
    ParamRange { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, FrameError>;
