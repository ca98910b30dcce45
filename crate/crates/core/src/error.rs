use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown coordinate `{name}` (valid: {valid})")]
    UnknownCoordinate { name: String, valid: String },
    #[error("function `{func}` takes {expected} argument(s), got {found}")]
    Arity {
        func: String,
        expected: usize,
        found: usize,
    },
    #[error("domain error in `{node}` at value {value}")]
    Domain { node: String, value: f64 },
    #[error("derivative order {0} exceeds the supported maximum of 3")]
    OrderTooHigh(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: String, found: String },
    #[error("singular jacobian (det = {det:e})")]
    SingularJacobian { det: f64 },
    #[error("singular metric (det = {det:e})")]
    SingularMetric { det: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Error {
        Error::DimMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
