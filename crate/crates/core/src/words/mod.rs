// SPDX-License-Identifier: MIT
//! Lazy word algebra, word files, and construction-sequence validators.

pub mod expr;
pub mod io;
pub mod readability;
pub mod sequence;

pub use expr::{Node, WordExpr, WordRef};
pub use readability::{marker_certificate, validate_unique_readability, MarkerCertificate, ReadabilityReport};
pub use sequence::{
    layout, parse_level, reassemble, symbol_level, uniformity_of_layouts, validate_uniformity, ConstructionSequence,
    Level, ParseResult, Segment, SequenceKind, UniformityReport,
};

use num_bigint::BigUint;

/// Exact length, computed on the tree.
pub fn word_length(e: &WordExpr) -> BigUint {
    e.len().clone()
}
