//! Finite-dimensional nilpotent Lie algebras spanned by bracket fields,
//! the truncated Baker–Campbell–Hausdorff product, weak Malcev bases,
//! polynomial group laws and the covering map `y -> e^{y₁X₁}⋯e^{y_nX_n}(x₀)`.

mod algebra;
mod bch;
mod covering;
mod malcev;

pub use algebra::{abstract_algebra, AbstractNilpotent, Element};
pub use bch::{bch, bch_words, DynkinTerm};


pub use malcev::{group_law, group_law_of, weak_malcev, GroupLaw, MalcevBasis};
pub use covering::{covering_map, isotropy, CoveringMap};
