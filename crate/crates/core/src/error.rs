use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A generator derivative was requested at a point where it does not exist.
    #[error("generator `{generator}` is not differentiable at u = {u}")]
    NotDifferentiable { generator: String, u: f64 },

    /// A generator failed validation at registration.
    #[error("invalid generator `{name}`: {reason}")]
    InvalidGenerator { name: String, reason: String },

    /// The hypotheses required by an operation are not met.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature on [{lower}, {upper}] did not converge: estimate {estimate:e}, \
         error {error:e} after {intervals} subintervals"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    /// No triangle-inequality violation above the margin floor was found.
    #[error("no violation found: maximum margin {max_margin:e} at t = {t_at_max}")]
    SearchFailure { max_margin: f64, t_at_max: f64 },

    #[error("certificate error: {0}")]
    Certificate(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
