use framecast::FrameError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable file, invalid JSON, wrong document shape or bad flag value.
    #[error("{0}")]
    Malformed(String),

    #[error(transparent)]
    Analysis(#[from] FrameError),
}

impl CliError {
    /// Process exit code for this failure.
    ///
    /// | code | meaning |
    /// |------|---------|
    /// | 1 | malformed input or invalid parameters |
    /// | 2 | dimension mismatch |
    /// | 4 | degenerate system |
    /// | 5 | spectral radius not below 1 |
    /// | 6 | generator not cyclic |
    /// | 7 | perturbation parameters not admissible |
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Malformed(_) => 1,
            CliError::Analysis(e) => match e {
                FrameError::NotSquare { .. } | FrameError::DimensionMismatch { .. } => 2,
                FrameError::DegenerateSystem(_) | FrameError::ZeroVector | FrameError::NotAFrame { .. } => 4,
                FrameError::SpectralRadius { .. } => 5,
                FrameError::NotCyclic(_) => 6,
                FrameError::Admissibility { .. } => 7,
                FrameError::NonFinite { .. }
                | FrameError::FunctionUndefined { .. }
                | FrameError::NotUnit { .. }
                | FrameError::NotHermitian { .. }
                | FrameError::SingularOperator { .. }
                | FrameError::ParamRange { .. }
                | FrameError::InvalidArgument(_) => 1,
            },
        }
    }
}
