use thiserror::Error;

use crate::monge::Classification;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityDomain(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown cost function `{0}`")]
    UnknownCost(String),

    #[error("unknown distribution family `{0}`")]
    UnknownFamily(String),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error:e}, target {target:e})")]
    NonConvergence {
        subdivisions: usize,
        error: f64,
        target: f64,
    },

    #[error("integrand is not finite at u = {0}")]
    NonFiniteIntegrand(f64),

    #[error("cost is not finite at (x, y) = ({x}, {y})")]
    NonFiniteCost { x: f64, y: f64 },

    #[error("expectation bounds do not apply: cost is {0} on the checked domain")]
    Inapplicable(Classification),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical pipeline as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::NonFiniteIntegrand(_)
                | Error::NonFiniteCost { .. }
                | Error::Inapplicable(_)
                | Error::Degenerate(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
