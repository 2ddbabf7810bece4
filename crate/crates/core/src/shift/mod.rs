//! Subshifts, their presentations, languages and Fischer covers.

mod cover;
mod fischer;
mod language;
mod spec;
pub(crate) mod subset;

pub use cover::{build_cover, Cover, Edge};
pub use fischer::{chain_cover, fischer_cover, sft_shortcut, CoverOrigin, FischerCover, FollowerClass, Regularity};
pub use language::{enumerate_words, language_count, Language};
pub use spec::{ShiftKind, ShiftSpec, SoficEdge};
