use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate parameterization: {0}")]
    Degenerate(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("construction precondition violated: {0}")]
    Precondition(String),
    /// A single level-0 generator cannot carry nonzero seeds at both level-1
    /// residues while keeping them orthogonal.
    #[error("at least two level-0 generators are required when both level-1 seeds are nonzero (got {rho0})")]
    TooFewLevelZeroGenerators { rho0: usize },
    #[error("infeasible schedule: {0}")]
    Infeasible(crate::schedules::Infeasibility),
}

pub type Result<T> = std::result::Result<T, FrameError>;
