use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("arity mismatch: expected {expected} maps, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix shapes do not compose: {0}")]
    Shape(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("malformed polynomial data: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("map must have n-1 components in n >= 2 variables (got {components} in {nvars})")]
    BadPolyMap { components: usize, nvars: usize },
    #[error("vector fields live in different dimensions ({0} vs {1})")]
    DimMismatch(usize, usize),
    #[error("Lie series did not terminate within {max_terms} terms")]
    NonTerminatingSeries { max_terms: usize },
    #[error("word cap {cap} is too small to certify nilpotency")]
    CapTooSmall { cap: usize },
    #[error("invalid word: {0}")]
    BadWord(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TorsionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("word tuple must have length {expected}, found {found}")]
    TupleLength { expected: usize, found: usize },
    #[error("multiindex must have length {expected}, found {found}")]
    BetaLength { expected: usize, found: usize },
    #[error("Jacobian determinant of {0} is not constant")]
    NonConstantJacobian(&'static str),
    #[error("map {0} is not invertible with the supplied inverse")]
    BadInverse(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Torsion(#[from] TorsionError),
    #[error("tuple budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("polytope is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NilpotentError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("bracket [{0}, {1}] leaves the rational span of the stored fields")]
    DependentBracket(String, String),
    #[error("spanning set is not closed under the bracket")]
    NotASubalgebra,
    #[error("algebra element has {found} coordinates, expected {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("covering map is singular at the base point ({0})")]
    SingularAtOrigin(String),
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}
