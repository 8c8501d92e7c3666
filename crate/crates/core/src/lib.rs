//! Condorcet-winner identification in dueling bandits.
//!
//! The crate is split into a preference environment ([`env`]), instance
//! hardness quantities ([`complexity`]), sampling primitives
//! ([`subroutines`]), the identification algorithms ([`identify`]) and an
//! experiment runner ([`harness`]).

pub mod complexity;
pub mod env;
mod error;
pub mod harness;
pub mod identify;
pub mod subroutines;

pub use error::{Error, Result};
