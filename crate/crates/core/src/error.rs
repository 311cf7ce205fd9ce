use thiserror::Error;

/// Errors raised by the gas model, field and geometry routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or parameter lies outside the domain of an operation
    /// (singular kernel evaluation, coincident particles, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A geometric hypothesis failed (window outside the support, separation
    /// violated, no admissible crenel shift, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A quadrature or root solve did not converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The combination of kernel, potential and dimension is not covered.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Invalid user-supplied parameters.
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// True for failures that come from bad inputs rather than numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numeric(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
