//! Molecular subgraph featurization and classification.
//!
//! Molecules (SMILES, V2000 SD files, protein sequences) become labeled
//! graphs; every atom roots a neighborhood subgraph per height, whose
//! canonical signature is counted into a sparse feature vector. Feature
//! matrices feed cosine or decomposition kernels and four classifier
//! families (random forest, perceptron network, partitioned network, SVM),
//! which are scored by AUROC under k-fold or shuffle-split protocols.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod classifiers;
pub mod evaluate;
pub mod featurizer;
pub mod ingest;
pub mod kernels;
pub mod molgraph;
pub mod rng;
mod scalar;

pub use scalar::Scalar;

pub type Dataset = featurizer::DatasetMatrix<f64>;
pub type Matrix = featurizer::DenseMatrix<f64>;
pub type Row = featurizer::SparseRow<f64>;
pub type Gram = kernels::GramMatrix<f64>;
pub type Forest = classifiers::ForestModel<f64>;
pub type Net = classifiers::NetModel<f64>;
pub type Svm = classifiers::SvmModel<f64>;
pub type Classifier = classifiers::Model<f64>;
