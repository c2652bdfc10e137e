//! Molecular graphs and the parsers that build them.

mod distance;
pub mod elements;
mod graph;
mod protein;
mod sdf;
mod smiles;

pub use distance::{all_pairs_distances, bfs_distances, DistanceTable};
pub use graph::{AtomNode, Bond, BondOrder, GraphError, MolecularGraph, NodeKind};
pub use protein::{protein_to_chain_graph, protein_to_chain_graph_named, SequenceError};
pub use sdf::{parse_sdf, SdfError, SdfParse, SdfRecord, SdfSkip};
pub use smiles::{parse_smiles, parse_smiles_named, SmilesError};
