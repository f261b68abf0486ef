use thiserror::Error;

use crate::states::BasisLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spatial configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid populations: {0}")]
    InvalidPopulations(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("negative base decay rate {0}")]
    NegativeRate(f64),

    #[error("basis state |{0}> is forbidden by particle statistics for this configuration")]
    ForbiddenState(BasisLabel),

    #[error("sLOCC post-selection probability vanishes ({0:e})")]
    ZeroProbability(f64),

    #[error("closed-form sLOCC probability {0} lies outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("integration step {dt} too large for generator bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("indistinguishability undefined: both joint detection products vanish")]
    Undefined,

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with a description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with any context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }
}
