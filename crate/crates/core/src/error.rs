use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("theta argument is zero")]
    ZeroArgument,
    #[error("singular denominator: {what} at index {index}")]
    SingularDenominator { what: String, index: i64 },
    #[error("division by zero in generalized product at index {0}")]
    DivisionByZero(i64),
    #[error("series does not terminate; supply an explicit cutoff")]
    NonTerminating,
    #[error("constraint cannot be resolved: {0}")]
    Constraint(String),
    #[error("unknown identity id `{0}`")]
    UnknownIdentity(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot parse complex number `{0}`")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
