use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("{function}: argument {value} is outside the domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The request is well formed but has no closed-form route.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(
        "quadrature failed to converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error estimate {abs_error:e})"
    )]
    Quadrature {
        estimate: f64,
        abs_error: f64,
        subdivisions: usize,
    },

    /// A design target that no impairment level can meet.
    #[error("infeasible target: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn domain(function: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            function,
            value,
            expected,
        }
    }
}
