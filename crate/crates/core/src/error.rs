use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("algebra dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("operands belong to different algebras")]
    AlgebraMismatch,
    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),
    #[error("element is not invertible (scalar part is zero)")]
    NonInvertible,
    #[error("invalid PDE: {0}")]
    InvalidPde(String),
    #[error("characteristic polynomial in the lifted variable vanishes identically")]
    DegenerateCharacteristic,
    #[error("characteristic polynomial in the lifted variable is a nonzero constant")]
    NoRoot,
    #[error("lifting is not unique at order {order}: {reason}")]
    DegenerateLift { order: usize, reason: String },
    #[error("closed-form seed is degenerate: {0}")]
    DegenerateSeed(String),
    #[error("unknown analytic function `{0}`")]
    UnknownFunction(String),
    #[error("analytic function evaluated at its pole {0}")]
    PoleOnDomain(String),
    #[error("jet degree {have} is below the PDE order {need}")]
    InsufficientDepth { have: usize, need: usize },
    #[error("requested member index {requested} but only {available} are available")]
    InsufficientMembers { requested: usize, available: usize },
    #[error("root selection failed: {0}")]
    RootSelection(String),
    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// True for failures that come from the mathematics rather than the input format.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateCharacteristic
                | Error::NoRoot
                | Error::DegenerateLift { .. }
                | Error::DegenerateSeed(_)
                | Error::NonInvertible
                | Error::PoleOnDomain(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
