use thiserror::Error;

/// Errors raised by the engine, the searches and the command-line surface.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid field or parameter record.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A value lies outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no admissible S: {0}")]
    NoAdmissibleS(String),

    #[error("negative split: {0}")]
    NegativeSplit(String),

    #[error("enumeration cap exceeded: {needed} candidates requested, cap is {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    /// The search failed to reproduce a guaranteed witness. This is a defect.
    #[error("witness not found (implementation defect): {0}")]
    WitnessNotFound(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("axiom shape rejected: {0}")]
    AxiomShapeRejected(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for this error: 1 usage, 2 domain/precondition,
    /// 3 verification failure, 4 cap exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            Error::InvalidParams(_)
            | Error::Domain(_)
            | Error::NoAdmissibleS(_)
            | Error::NegativeSplit(_)
            | Error::SingularSystem(_)
            | Error::AxiomShapeRejected(_) => 2,
            Error::VerificationFailed(_) | Error::WitnessNotFound(_) => 3,
            Error::CapExceeded { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
