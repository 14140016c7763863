use thiserror::Error;

/// Failures with a fixed process exit code.
#[derive(Debug, Error)]
pub enum Failure {
    /// Unreadable or malformed input, bad flag combinations.
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Evidence(String),
    #[error("{0}")]
    Infeasible(String),
    /// PN or PS conditioning on a zero-probability cell.
    #[error("{0}")]
    Undefined(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Schema(_) => 2,
            Failure::Evidence(_) => 3,
            Failure::Infeasible(_) => 4,
            Failure::Undefined(_) => 5,
        }
    }
}

impl From<causebound::BuildError> for Failure {
    fn from(e: causebound::BuildError) -> Self {
        use causebound::BuildError;
        match e {
            BuildError::UndefinedConditional { .. } => Failure::Undefined(e.to_string()),
            BuildError::MissingNormalizer { .. } | BuildError::Evidence(_) => Failure::Evidence(e.to_string()),
            _ => Failure::Schema(e.to_string()),
        }
    }
}
