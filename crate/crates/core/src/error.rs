use thiserror::Error;

/// Errors raised by the lump, metric and geometry computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid lump: {0}")]
    InvalidLump(String),

    #[error("invalid fiber coordinates: {0}")]
    InvalidCoordinates(String),

    #[error("invalid isometry parameters: {0}")]
    InvalidIsometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: estimate {estimate:.6e}, error {error:.3e} after {evaluations} evaluations")]
    ConvergenceFailure {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("path length diverges: partial length {partial:.6e} still growing at t = {t:.6e}")]
    Divergence { partial: f64, t: f64 },

    #[error("metric factor diverges near alpha = {alpha_re}{alpha_im:+}i")]
    MetricDivergence { alpha_re: f64, alpha_im: f64 },

    #[error("embedding condition fails at a = {a:.6e} (slack {slack:.3e})")]
    Embedding { a: f64, slack: f64 },

    #[error("ODE step size underflow at t = {t:.6e}")]
    StepUnderflow { t: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        domain,
    }
}
