use thiserror::Error;

/// Errors reported by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GwpError {
    /// Argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Packet parameters violate their invariants (p, gamma, eps must be positive, dim >= 2).
    #[error("invalid packet parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A quadrature or series did not reach its tolerance.
    #[error("no convergence in {what}: last relative change {last_change:e}")]
    NonConvergence { what: String, last_change: f64 },

    /// The sampling grid cannot represent the analysing wavelet at the requested scale.
    #[error(
        "grid too coarse: wavelet support reaches |k| = {k_max:.4} but Nyquist is {nyquist:.4}"
    )]
    Nyquist { k_max: f64, nyquist: f64 },

    #[error("empty {0} list")]
    EmptyAxis(&'static str),

    /// Scale list does not cover the band occupied by the signal.
    #[error("insufficient scale coverage: {0}")]
    ScaleCoverage(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, GwpError>;
