use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical kernels, the certificates and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("invalid collocation rule: {0}")]
    InvalidRule(String),

    #[error("matrix is numerically singular (pivot {pivot} at step {index})")]
    Singular { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("QR iteration failed to converge for eigenvalue {index} after {iterations} sweeps")]
    EigenNoConvergence { index: usize, iterations: usize },

    #[error("M has a real negative eigenvalue {value}; the collocation step is not certified")]
    RealNegativeEigenvalue { value: f64 },

    #[error("resolvent (M + lambda I)^-1 undefined at lambda = {lambda}")]
    ResolventUndefined { lambda: f64 },

    #[error("singular collocation system on interval {interval}")]
    SingularStep { interval: usize },

    #[error("{what} exceeds the cap ({value} > {cap})")]
    SizeCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("missing coefficient block for interval {0}")]
    MissingBlock(usize),

    #[error("quadrature did not reach tolerance {tol} (estimate {estimate}, error {error})")]
    Quadrature { tol: f64, estimate: f64, error: f64 },

    #[error(
        "fixed-point iteration on interval {interval} did not converge in {iterations} iterations \
         (last update {last_update}, contraction factor {contraction})"
    )]
    FixedPoint {
        interval: usize,
        iterations: usize,
        last_update: f64,
        contraction: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    /// True for failures of a mathematical certificate (as opposed to bad input).
    pub fn is_certificate_failure(&self) -> bool {
        matches!(
            self,
            Error::RealNegativeEigenvalue { .. }
                | Error::ResolventUndefined { .. }
                | Error::SingularStep { .. }
                | Error::Singular { .. }
                | Error::EigenNoConvergence { .. }
                | Error::FixedPoint { .. }
                | Error::Quadrature { .. }
        )
    }
}
