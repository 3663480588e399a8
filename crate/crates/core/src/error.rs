use thiserror::Error;

/// Errors raised while validating inputs, building a problem, or solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve is not admissible at index {index}: {reason}")]
    NonAdmissible { index: usize, reason: String },

    #[error("schedule exceeds order: {0}")]
    SizeMismatch(String),

    #[error("invalid restart schedule: {0}")]
    InvalidSchedule(String),

    #[error("eigenvalue {index} is zero or below the modulus floor ({modulus:e})")]
    ZeroEigenvalue { index: usize, modulus: f64 },

    #[error("polynomial root {index} is zero")]
    ZeroRoot { index: usize },

    #[error("gamma = -1 is forbidden for the non-convergent variant")]
    GammaForbidden,

    #[error("variant {variant} cannot be built from a {curve} curve")]
    VariantMismatch { variant: String, curve: String },

    #[error("curve must be strictly decreasing for this construction")]
    CurveNotDecreasing,

    #[error(
        "candidate vector lies numerically inside the span of the basis (residual norm {0:e})"
    )]
    DegenerateCandidate(f64),

    #[error("orthogonal complement is exhausted (basis size {basis}, dimension {dim})")]
    ComplementExhausted { basis: usize, dim: usize },

    #[error("matrix is numerically singular (pivot {pivot:e} at column {column})")]
    NumericallySingular { pivot: f64, column: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("residual is zero; the current iterate already solves the system")]
    ZeroResidual,

    #[error("non-finite value in {0}")]
    NonFinite(String),
}

impl Error {
    /// True for errors caused by inadmissible user input, as opposed to
    /// numerical failures inside the construction.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonAdmissible { .. }
                | Error::SizeMismatch(_)
                | Error::InvalidSchedule(_)
                | Error::ZeroEigenvalue { .. }
                | Error::ZeroRoot { .. }
                | Error::GammaForbidden
                | Error::VariantMismatch { .. }
                | Error::CurveNotDecreasing
                | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
