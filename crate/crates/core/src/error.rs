use thiserror::Error;

/// Failures reported by the construction and verification routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain where a routine is defined or its
    /// error bounds are valid.
    #[error("domain error: {0}")]
    Domain(String),

    /// A factor `1 - a q^{-j}` of a negative-index q-Pochhammer symbol
    /// vanishes (or cannot be certified non-zero).
    #[error("pole: factor j = {0} of the q-Pochhammer symbol vanishes")]
    Pole(i64),

    /// A certified computation contradicted a proven structural fact
    /// (e.g. missing sign alternation at the bracket points).
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    /// Balls overlap where a strict ordering is required; rerun at a
    /// higher working precision.
    #[error("precision escalation required: {0}")]
    PrecisionEscalation(String),

    #[error("size cap exceeded: {what} needs {requested} entries, cap is {cap}")]
    SizeCap {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("singular Jacobian at Newton iteration {0}")]
    SingularJacobian(usize),

    #[error("invalid base specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
