//! Capacity computation, random-coding simulation and time-expansion tools
//! for deterministic relay networks.
//!
//! Networks come in two flavours: linear finite-field networks, where each
//! received vector is a mod-`p` combination of transmitted vectors, and
//! general deterministic networks given by per-node function tables.

pub mod catalog;
pub mod coding;
pub mod cutset;
pub mod document;
pub mod entropy;
pub mod error;
pub mod field;
pub mod generate;
pub mod layers;
pub mod limits;
pub mod network;
pub mod nodeset;
pub mod rng;
pub mod submodularity;
pub mod suites;
pub mod unfolding;

pub use entropy::{EntropyEngine, ProductDistribution};
pub use error::{Error, FieldError, Result};
pub use field::FieldMatrix;
pub use layers::{layer_structure, CutLayer, LayerDecomposition, Layering};
pub use limits::Limits;
pub use network::{Model, NetworkDescription, RelayNetwork, ValidationReport};
pub use nodeset::{NodeId, NodeSet};

/// Crate version reported by every tool output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
