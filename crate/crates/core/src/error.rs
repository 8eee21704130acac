use thiserror::Error;

use crate::geometry::{ManifoldKind, TangentVector};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("manifold mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: ManifoldKind,
        found: ManifoldKind,
    },

    /// The target lies (numerically) on the cut locus of the base point, so the
    /// minimal geodesic is not unique. `candidates` holds the competing initial
    /// velocities, sorted lexicographically by ambient components.
    #[error("point lies on the cut locus ({} candidate geodesics)", candidates.len())]
    CutLocus { candidates: Vec<TangentVector> },

    #[error("step guard: {0}")]
    StepGuard(String),

    #[error("no curvature constant available: {0}")]
    MissingKappa(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
