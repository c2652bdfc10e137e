//! Forest, neural net and SVM classifiers sharing one train/score interface.

mod forest;
mod net;
mod svm;
mod tree;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::{bootstrap_weights, train_forest, ForestConfig, ForestModel};
pub use net::{
    partition_sizes, train_mlp, train_partitioned_net, FeedForwardNet, MlpModel, NetConfig, NetModel,
    PartitionedNetModel, Snapshot, Topology, MLP_HIDDEN, PARTITIONED_HIDDEN,
};
pub use svm::{train_svm, SupportVector, SvmConfig, SvmKernel, SvmModel};
pub use tree::{DecisionTree, MaxFeatures, SplitCriterion, TreeNode};

use crate::featurizer::{DenseMatrix, Label};
use crate::Scalar;

pub const MODEL_FORMAT: &str = "molforest-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training matrix is empty")]
    Empty,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("need at least {required} feature columns, found {found}")]
    TooFewColumns { found: usize, required: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("solver stopped after {iterations} iterations with KKT residual {residual}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("row has {found} columns, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_training_data<T: Scalar>(x: &DenseMatrix<T>, y: &[Label]) -> Result<(), ClassifierError> {
    if x.rows() != y.len() {
        return Err(ClassifierError::LengthMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    if x.rows() == 0 {
        return Err(ClassifierError::Empty);
    }
    if y.iter().all(|l| *l == y[0]) {
        return Err(ClassifierError::SingleClass);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "algorithm")]
pub enum ClassifierConfig {
    Forest(ForestConfig),
    Mlp(NetConfig),
    Partitioned(NetConfig),
    Svm(SvmConfig),
}

impl ClassifierConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierConfig::Forest(_) => "forest",
            ClassifierConfig::Mlp(_) => "mlp",
            ClassifierConfig::Partitioned(_) => "partitioned",
            ClassifierConfig::Svm(_) => "svm",
        }
    }

    /// Score at or above which a row is predicted positive.
    pub fn threshold(&self) -> f64 {
        match self {
            ClassifierConfig::Svm(_) => 0.0,
            _ => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "algorithm")]
pub enum Model<T> {
    Forest(ForestModel<T>),
    Mlp(NetModel<T>),
    Partitioned(NetModel<T>),
    Svm(SvmModel<T>),
}

#[derive(Serialize, Deserialize)]
struct Envelope<M> {
    format: String,
    version: u32,
    scalar: String,
    n_features: usize,
    model: M,
}

impl<T: Scalar> Model<T> {
    pub fn train(
        config: &ClassifierConfig,
        x: &DenseMatrix<T>,
        y: &[Label],
        seed: u64,
    ) -> Result<Self, ClassifierError> {
        Ok(match config {
            ClassifierConfig::Forest(c) => Model::Forest(train_forest(x, y, c, seed)?),
            ClassifierConfig::Mlp(c) => Model::Mlp(train_mlp(x, y, c, seed)?),
            ClassifierConfig::Partitioned(c) => Model::Partitioned(train_partitioned_net(x, y, c, seed)?),
            ClassifierConfig::Svm(c) => Model::Svm(train_svm(x, y, c)?),
        })
    }

    pub fn score(&self, row: &[T]) -> T {
        match self {
            Model::Forest(m) => m.score(row),
            Model::Mlp(m) | Model::Partitioned(m) => m.score(row),
            Model::Svm(m) => m.score(row),
        }
    }

    pub fn score_matrix(&self, x: &DenseMatrix<T>) -> Vec<T> {
        (0..x.rows()).map(|r| self.score(x.row(r))).collect()
    }

    pub fn threshold(&self) -> T {
        match self {
            Model::Svm(_) => T::zero(),
            _ => T::of(0.5),
        }
    }

    /// Feature columns expected by `score`; `None` for precomputed SVM kernels.
    pub fn n_features(&self) -> Option<usize> {
        match self {
            Model::Forest(m) => Some(m.n_features),
            Model::Mlp(m) | Model::Partitioned(m) => Some(m.net.n_inputs()),
            Model::Svm(m) => match m.config.kernel {
                SvmKernel::Precomputed => None,
                _ => m.support.first().map(|s| s.row.len()),
            },
        }
    }

    pub fn save<W: Write>(&self, w: W) -> Result<(), ClassifierError> {
        let env = Envelope {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            scalar: std::any::type_name::<T>().to_string(),
            n_features: self.n_features().unwrap_or(0),
            model: self,
        };
        serde_json::to_writer(w, &env).map_err(|e| ClassifierError::Format(e.to_string()))
    }

    pub fn load<R: Read>(r: R) -> Result<Self, ClassifierError> {
        let env: Envelope<Model<T>> =
            serde_json::from_reader(r).map_err(|e| ClassifierError::Format(e.to_string()))?;
        if env.format != MODEL_FORMAT {
            return Err(ClassifierError::Format(format!("unknown format {:?}", env.format)));
        }
        if env.version != MODEL_VERSION {
            return Err(ClassifierError::Format(format!("unsupported version {}", env.version)));
        }
        if env.scalar != std::any::type_name::<T>() {
            return Err(ClassifierError::Format(format!(
                "model stores {} scalars, expected {}",
                env.scalar,
                std::any::type_name::<T>()
            )));
        }
        Ok(env.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (DenseMatrix<f64>, Vec<Label>) {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i % 4) as f64, (i % 3) as f64 * 0.37, (i / 10) as f64])
            .collect();
        let y = (0..30)
            .map(|i| if i % 4 >= 2 { Label::Positive } else { Label::Negative })
            .collect();
        (DenseMatrix::from_rows(&rows), y)
    }

    #[test]
    fn every_model_round_trips_exactly() {
        let (x, y) = data();
        let configs = [
            ClassifierConfig::Forest(ForestConfig {
                n_trees: 5,
                ..ForestConfig::default()
            }),
            ClassifierConfig::Mlp(NetConfig {
                voted: true,
                ..NetConfig::default()
            }),
            ClassifierConfig::Partitioned(NetConfig::default()),
            ClassifierConfig::Svm(SvmConfig {
                kernel: SvmKernel::Rbf { gamma: 0.7 },
                ..SvmConfig::default()
            }),
        ];
        for cfg in &configs {
            let m = Model::train(cfg, &x, &y, 9).unwrap();
            let mut buf = Vec::new();
            m.save(&mut buf).unwrap();
            let back: Model<f64> = Model::load(buf.as_slice()).unwrap();
            assert_eq!(back, m);
            let mut again = Vec::new();
            back.save(&mut again).unwrap();
            assert_eq!(buf, again);
            for r in 0..x.rows() {
                assert_eq!(m.score(x.row(r)).to_bits(), back.score(x.row(r)).to_bits());
                assert!(m.score(x.row(r)).is_finite());
            }
        }
    }

    #[test]
    fn load_checks_header() {
        let (x, y) = data();
        let m = Model::train(&ClassifierConfig::Svm(SvmConfig::default()), &x, &y, 0).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        assert!(matches!(
            Model::<f32>::load(buf.as_slice()),
            Err(ClassifierError::Format(_))
        ));
        let text = String::from_utf8(buf).unwrap().replace("\"version\":1", "\"version\":9");
        assert!(Model::<f64>::load(text.as_bytes()).is_err());
    }

    #[test]
    fn config_json_is_tagged() {
        let cfg: ClassifierConfig =
            serde_json::from_str(r#"{"algorithm":"forest","n_trees":7,"criterion":"entropy"}"#).unwrap();
        assert_eq!(
            cfg,
            ClassifierConfig::Forest(ForestConfig {
                n_trees: 7,
                criterion: SplitCriterion::Entropy,
                ..ForestConfig::default()
            })
        );
        assert_eq!(cfg.threshold(), 0.5);
    }
}
