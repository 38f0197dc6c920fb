//! Near-optimal contraction orders for planar tensor networks via
//! minimum-carving-width contraction trees.

pub mod carver;
pub mod ctree;
pub mod error;
pub mod netgen;
pub mod netgraph;
pub mod oracle;
pub mod ratcatcher;
pub mod sequencer;

pub use error::{Error, Result};
pub use netgraph::{CutSet, Edge, Embedding, NetworkGraph, VertexSet};
