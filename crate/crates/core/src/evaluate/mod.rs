//! AUROC and accuracy, k-fold and shuffle-split protocols, Welch t-tests.

mod metrics;
mod protocol;
mod report;
mod splits;
mod stats;

use thiserror::Error;

pub use metrics::{accuracy, auroc, roc_area, roc_curve, RocPoint};
pub use protocol::{
    run_protocol, training_vocabulary, PipelineSpec, Prediction, Protocol, ProtocolResult, TrialResult,
};
pub use report::{summarize, write_metrics_csv, write_roc_csv, write_summary_json, MetricSummary};
pub use splits::{kfold_indices, kfold_splits, shuffle_split_indices, Split, TrainFraction};
pub use stats::{ln_gamma, regularized_beta, student_t_two_sided, welch_t, MetricSample, WelchResult, ALPHA};

use crate::classifiers::ClassifierError;
use crate::featurizer::FeatureError;
use crate::kernels::KernelError;

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("no scores to evaluate")]
    Empty,
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("labels contain a single class")]
    SingleClass,
    #[error("non-finite score")]
    NonFiniteScore,
    #[error("cannot split {n} rows into {k} parts")]
    TooFewRows { n: usize, k: usize },
    #[error("training fraction {num}/{den} must lie strictly between 0 and 1")]
    InvalidFraction { num: usize, den: usize },
    #[error("invalid protocol {0:?}; expected kfold[:k] or shuffle[:trials[:num/den]]")]
    InvalidProtocol(String),
    #[error("metric {0:?} has no values")]
    EmptySample(String),
    #[error("metric {name:?} needs at least 2 values for a t-test, has {n}")]
    TooFewValues { name: String, n: usize },
    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<EvaluateError>,
    },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
