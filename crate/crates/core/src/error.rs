use thiserror::Error;

/// Which edge of an admissible interval a domain error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Lower,
    Upper,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("domain error: {what} = {value} lies outside ({lower}, {upper}) near the {edge:?} edge")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
        edge: Edge,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Convergence { estimate: f64, error_bound: f64 },

    #[error("root finder did not converge: {0}")]
    RootFinding(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal consistency failure: {what} (first {first:e}, second {second:e})")]
    Inconsistent {
        what: &'static str,
        first: f64,
        second: f64,
    },

    #[error("solver became unstable at t = {time}")]
    Unstable { time: f64 },

    #[error("comparison failed: {0}")]
    Comparison(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::OutOfRange { .. } | Error::Contract(_) | Error::Config(_) => 2,
            Error::Convergence { .. } | Error::RootFinding(_) | Error::Unstable { .. } => 3,
            Error::Inconsistent { .. } | Error::Comparison(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
