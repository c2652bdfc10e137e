//! Rooted neighborhood subgraphs, their canonical signatures, and the
//! count vectors and matrices built from them.

mod canon;
mod features;
mod io;
mod matrix;
mod subgraph;

use thiserror::Error;

pub use canon::{canonical_signature, subgraph_mass, Signature, MAX_SUBGRAPH_NODES};
pub use features::{
    height_features, pair_features, FeatureConfig, FeatureKey, FeatureMode, FeatureVector,
};
pub use io::{read_sparse, read_vocabulary, write_sparse, write_vocabulary, FileFormatError};
pub use matrix::{build_matrix, DatasetMatrix, DenseMatrix, FeatureVocabulary, Label, SparseRow};
pub use subgraph::{neighborhood_from_distances, neighborhood_subgraph, RootedSubgraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("at least one height is required")]
    NoHeights,
    #[error("at least one distance is required")]
    NoDistances,
    #[error("height mode does not accept non-zero distances")]
    DistanceInHeightMode,
    #[error("empty subgraph")]
    EmptySubgraph,
    #[error("neighborhood of {nodes} nodes exceeds the {limit}-node canonicalization limit")]
    SubgraphTooLarge { nodes: usize, limit: usize },
    #[error("{vectors} feature vectors but {labels} labels")]
    LengthMismatch { vectors: usize, labels: usize },
    #[error("matrix has {found} columns, vocabulary has {expected}")]
    VocabularyMismatch { expected: usize, found: usize },
    #[error("row {row} column {col} is not a positive integer count")]
    NonCountValue { row: usize, col: usize },
}
