//! Markov chains of residues along a Fischer cover.

mod analysis;
mod matrix;
mod system;

pub use analysis::{
    decompose_classes, limit_distribution, markov_condition, matrix_verdict, recombine, spectral_gap_estimate,
    visited_classes, ChainClass, ClassInfo, LimitDistribution, MarkovCondition, MarkovVerdict, SpectralGap,
};
pub use matrix::{CountMatrix, RationalDistribution, RationalMatrix, MAX_POWER};
pub use system::{ChainOptions, ChainSystem, ExtensionCounts, StateSpace, MAX_STATES};
