//! Directed subgraph matching with constraint-inclusion pattern reduction.
//!
//! The pipeline: parse a [`PatternGraph`], compute its
//! [`InclusionClosure`], [`reduce`] it to a [`MatchPlan`], then [`run`] the
//! plan over a [`DataGraph`]. [`oracle`] is an independent brute-force
//! enumerator used to cross-check results.

pub mod corpus;
pub mod digraph;
pub mod error;
pub mod executor;
pub mod inclusion;
pub mod oracle;
pub mod pattern;
pub mod reducer;

pub use digraph::{DataGraph, Direction, NodeId};
pub use error::{Error, Result};
pub use executor::{run, ExecConfig, MatchMode, MatchResult, Stats};
pub use inclusion::InclusionClosure;
pub use pattern::{EdgeId, PatternGraph, VertexId};
pub use reducer::{reduce, MatchPlan};

/// Builds the plan for `pattern`, with or without reduction.
pub fn plan(pattern: &PatternGraph, reduction: bool) -> Result<MatchPlan> {
    if reduction {
        reduce(pattern, &InclusionClosure::compute(pattern))
    } else {
        reducer::unreduced(pattern)
    }
}
