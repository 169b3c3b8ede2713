use thiserror::Error;

/// Every failure the engine can report. Variants map one-to-one onto the
/// CLI exit codes (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("series is not a unit: zero constant term")]
    NotAUnit,

    #[error("substitution domain error: {0}")]
    Domain(String),

    /// A precondition of the preparation statement does not hold. The
    /// message names the violated condition.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("1-form is not integrable: Θ∧dΘ has {witness}")]
    NotIntegrable { witness: String },

    #[error("1-form is not closed: dθ has {witness}")]
    NotClosed { witness: String },

    #[error("field extension needed: {0}")]
    FieldExtension(String),

    #[error("homological system inconsistent at degree {degree} ({context})")]
    SolverFailure { degree: usize, context: String },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("certificate check failed: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Hypothesis(_)
            | Error::NotIntegrable { .. }
            | Error::NotClosed { .. }
            | Error::Unsupported(_)
            | Error::NotAUnit
            | Error::Domain(_)
            | Error::Shape(_) => 2,
            Error::FieldExtension(_) => 3,
            Error::SolverFailure { .. } | Error::Verification(_) => 4,
            Error::Parse(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
