use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical method could not reach its stated accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// An iterative eigensolver did not converge.
    #[error("no convergence after {iterations} iterations: {detail}")]
    Iteration { iterations: usize, detail: String },
    /// A root bracket without a sign change.
    #[error("no sign change on [{a}, {b}]")]
    Bracket { a: f64, b: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn accuracy<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Accuracy(msg.into()))
}
