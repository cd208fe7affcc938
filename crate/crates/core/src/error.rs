use thiserror::Error;

use crate::grid::CurveKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The likelihood carries no mass anywhere on the grid.
    #[error("degenerate evidence: {0}")]
    DegenerateEvidence(String),

    /// Prior and likelihood share no support, so their product is all zero.
    #[error("contradictory evidence: {0}")]
    ContradictoryEvidence(String),

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("incompatible grids: {left} points vs {right} points")]
    IncompatibleGrids { left: usize, right: usize },

    #[error("expected a {expected} curve, got a {found} curve")]
    WrongCurveKind {
        expected: CurveKind,
        found: CurveKind,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
