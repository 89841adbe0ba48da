use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a permutation must have at least one entry")]
    Empty,
    #[error("value {value} at position {position} is outside 1..={n}")]
    OutOfRange { position: usize, value: i64, n: usize },
    #[error("duplicate value {value} at position {position}")]
    Duplicate { position: usize, value: u32 },
    #[error("cannot parse token {token:?} at position {position}")]
    Parse { position: usize, token: String },
    #[error("{0} is a base (its first value is 1) and has no parent")]
    Base(String),
    #[error("position {position} is not a true fixed point of {perm}")]
    InvalidBump { perm: String, position: usize },
    #[error("forest of size {n} exceeds the configured maximum {max}")]
    SizeLimit { n: usize, max: usize },
    #[error("budget exceeded: more than {budget} {what}")]
    BudgetExceeded { what: &'static str, budget: u64 },
    #[error("{0} is not an atom of level 0")]
    NotAnAtom(f64),
    #[error("point {0} coincides with an existing atom")]
    CoincidentPoint(f64),
    #[error("spine has {got} points but radius {need} was requested")]
    SpineTooShort { need: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Domain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
