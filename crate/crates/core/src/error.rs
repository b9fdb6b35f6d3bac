use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on a scalar argument or configuration value failed.
    InvalidArgument(String),
    /// Two operands disagree on a dimension.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A matrix that must have unit-norm columns does not.
    NotNormalized { column: usize, norm: f64 },
    /// Materializing an object would exceed the configured size guard.
    ResourceLimit { requested: usize, limit: usize },
    /// A receiver and a grid point coincide (the Green's function is singular).
    InvalidGeometry(String),
    /// The columns listed are linearly dependent on the preceding ones.
    RankDeficient { columns: Vec<usize> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what,
                expected,
                found,
            })
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, found {found}"),
            Error::NotNormalized { column, norm } => {
                write!(f, "column {column} has norm {norm}, expected unit norm")
            }
            Error::ResourceLimit { requested, limit } => write!(
                f,
                "resource limit exceeded: {requested} entries requested, limit is {limit}"
            ),
            Error::InvalidGeometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::RankDeficient { columns } => {
                write!(f, "rank-deficient system, dependent columns {columns:?}")
            }
        }
    }
}

impl core::error::Error for Error {}
