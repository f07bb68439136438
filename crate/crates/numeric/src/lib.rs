//! Floating-point side of the toolkit: quasi-Monte-Carlo integration,
//! Carnot-Caratheodory ball sampling, the one-variable polynomial
//! algorithms and the inequality verification engine.

pub mod ccballs;
pub mod corpus;
pub mod error;
pub mod fpoly;
pub mod polyalg;
pub mod qmc;
pub mod upoly;
pub mod verify;

pub use error::NumericError;
