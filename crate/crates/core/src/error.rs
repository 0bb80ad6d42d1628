use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid set description: {0}")]
    InvalidSet(String),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("no closed-form intersection oracle for {0}")]
    NoOracle(String),

    #[error("the intersection of the sets is empty")]
    EmptyIntersection,

    #[error("coincident subspaces: no Friedrichs angle beyond the intersection")]
    CoincidentSubspaces,

    #[error("nested subspaces: one subspace contains the other, no Friedrichs angle beyond the intersection")]
    NestedSubspaces,

    #[error("basis columns are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("no subspace pair with Friedrichs angle in [{lo}, {hi}] after {draws} draws")]
    RetriesExhausted { lo: f64, hi: f64, draws: usize },

    #[error("insufficient samples for a rate estimate: {found} above the floating-point floor, need {needed}")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("problem file: {0}")]
    Problem(String),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
