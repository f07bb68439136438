//! Exact symbolic layer: rational polynomials, fiber vector fields and their
//! brackets, iterated flows, torsion functionals, Newton polytopes and the
//! nilpotent Lie-algebra machinery (BCH, Malcev coordinates, covering maps).
//!
//! Everything in this crate is exact rational arithmetic. Floating point
//! lives in `torsion-numeric`.

pub mod error;
pub mod geometry;
pub mod json;
pub mod linalg;
pub mod matrix;
pub mod nilpotent;
pub mod parse;
pub mod poly;
pub mod polytope;
pub mod torsion;

pub use error::{GeometryError, NilpotentError, PolyError, PolytopeError, TorsionError};
pub use matrix::PolyMatrix;
pub use poly::{Monomial, RatPoly};

/// Exact rational scalar. `num_rational` keeps it reduced with a positive
/// denominator.
pub type Rat = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Shorthand for `n / d`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}
