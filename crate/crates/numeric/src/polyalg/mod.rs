//! Constructive one-variable polynomial algorithms.

pub mod curves;
pub mod extract;
pub mod intervals;
pub mod monomial;
pub mod sublevel;

pub use curves::{scale_count, tangency_scan, ScaleCount, Tangency};
pub use extract::{dominates, extract_two_terms, TwoTerms};
pub use intervals::{check_refinement_bound, refine_interval, IntervalSet, RefineParams, Refinement};
pub use monomial::{check_curve, check_monomialize, curve_monomialize, monomialize, CoverCheck, MonomialCover, Piece};
pub use sublevel::{dyadic_eps, sublevel_measure, SublevelReport};
