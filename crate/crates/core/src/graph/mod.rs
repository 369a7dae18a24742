//! Network topologies, lazy Metropolis mixing weights and spectral quantities.

mod mixing;
mod spectral;
mod topology;

pub use mixing::{lazy_metropolis_weights, validate_mixing, MixingMatrix, ValidationReport};
pub use spectral::{spectral_quantities, symmetric_eigenvalues, SpectralQuantities};
pub use topology::{build_topology, parse_grid_dims, Topology, TopologyKind, TopologySpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("node {node} out of range for a {n}-node graph")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("grid {rows}x{cols} does not have {n} nodes")]
    GridMismatch { rows: usize, cols: usize, n: usize },
    #[error("custom topologies are built from an edge list")]
    CustomNeedsEdges,
    #[error("unknown topology `{0}`")]
    UnknownKind(String),
    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("not a valid mixing matrix:\n{0}")]
    InvalidMixing(String),
}
