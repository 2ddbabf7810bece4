//! Residue-class distribution and mass dimension of digit-restricted integer sets.
//!
//! A set of integers is described by a subshift over base-g digits (a full shift over
//! a digit set, a one-step shift of finite type, a sofic shift, an S-gap shift, or a
//! union). The library builds the Markov chains that govern how g-additive functions
//! of its elements are distributed among residue classes, decides uniformity, computes
//! mass dimensions, and checks every prediction against an exact enumeration oracle.

pub mod analyze;
pub mod chain;
pub mod dimension;
pub mod error;
pub mod graph;
pub mod numeral;
pub mod oracle;
pub mod shift;

pub use error::{Error, Result};
