//! Labeled molecule files, interaction pair files and structure resolution.

mod bursi;
mod drops;
mod pairs;
mod resolver;

use std::path::PathBuf;

use thiserror::Error;

pub use bursi::{load_bursi, LabeledMolecules};
pub use drops::{Drop, DropReason, DropReport};
pub use pairs::{
    load_pairs, pair_feature_vector, pair_feature_vectors, InteractionPair, PairKind, PairSet, PairSummary,
};
pub use resolver::{
    normalize_name, EntityKind, FetchHook, FetchResponse, RecordedFetch, ResolveError, Resolver, StructureRecord,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} has no usable records")]
    NoUsableRecords(PathBuf),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("columns {0:?} and {1:?} are mutually exclusive")]
    ConflictingColumns(&'static str, &'static str),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
