use aee_core::diagnostics::DiagnosticsError;
use aee_core::engine::EngineError;
use aee_core::estimators::EstimatorError;
use aee_core::mc::McError;

/// Top-level failure, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// Bad flags, unreadable files, malformed inputs: exit 2.
    #[error("{0}")]
    Config(String),
    /// The inputs were well formed but the computation could not proceed: exit 1.
    #[error("{0}")]
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

impl From<EstimatorError> for Failure {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::NonPositiveVariance(_) => Failure::Compute(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidKind(_)
            | EngineError::OrderTooLarge { .. }
            | EngineError::TermsExceedOrder { .. }
            | EngineError::NotOrdinary(_)
            | EngineError::Json(_) => Failure::Config(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<DiagnosticsError> for Failure {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::InvalidGrid(_) => Failure::Config(e.to_string()),
            DiagnosticsError::Engine(inner) => inner.into(),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<McError> for Failure {
    fn from(e: McError) -> Self {
        match e {
            McError::Degenerate { .. } => Failure::Compute(e.to_string()),
            McError::Estimator(inner) => inner.into(),
            _ => Failure::Config(e.to_string()),
        }
    }
}
