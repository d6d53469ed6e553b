use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The first group describes malformed input (bad dimensions, states that are
/// not density matrices); the second group describes broken numerical
/// contracts between components.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QncError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("hermiticity violated: max |m_ij - conj(m_ji)| = {0:.3e}")]
    NotHermitian(f64),

    #[error("trace violated: |Tr - 1| = {0:.3e}")]
    Trace(f64),

    #[error("positivity violated: smallest eigenvalue = {0:.3e}")]
    NotPositive(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("inconsistent oracle: {0}")]
    InconsistentOracle(String),
}

impl QncError {
    /// True for errors caused by the caller's input rather than by a
    /// numerical contract breaking inside the computation.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            QncError::Dimension(_)
                | QncError::NotHermitian(_)
                | QncError::Trace(_)
                | QncError::NotPositive(_)
                | QncError::Domain(_)
                | QncError::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, QncError>;
