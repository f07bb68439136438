use thiserror::Error;
use torsion_core::{GeometryError, NilpotentError, PolyError, PolytopeError, TorsionError};

#[derive(Debug, Error)]
pub enum NumericError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Torsion(#[from] TorsionError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Nilpotent(#[from] NilpotentError),
    #[error("root isolation failed: {0}")]
    RootIsolationFailure(String),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("zero-volume domain")]
    ZeroVolume,
    #[error("invalid input: {0}")]
    BadInput(String),
}
