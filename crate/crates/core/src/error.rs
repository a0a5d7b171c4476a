use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input: wrong shape, unparsable number, missing field.
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid mechanism: {0}")]
    Mechanism(String),

    /// An analysis was asked for outside the regime where its result holds.
    /// `requirement` names the result whose hypothesis failed.
    #[error("precondition failed ({requirement}): {message}")]
    Precondition { requirement: String, message: String },

    /// Internal consistency failure; indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn precondition(requirement: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Precondition {
            requirement: requirement.into(),
            message: message.into(),
        }
    }

    /// True for errors that are refusals rather than bad input.
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Precondition { .. })
    }
}
