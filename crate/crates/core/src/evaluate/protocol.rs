use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, auroc, roc_curve, RocPoint};
use super::splits::{kfold_splits, shuffle_split_indices, Split, TrainFraction};
use super::stats::MetricSample;
use super::EvaluateError;
use crate::classifiers::{ClassifierConfig, Model};
use crate::featurizer::{build_matrix, FeatureConfig, FeatureVector, FeatureVocabulary, Label};
use crate::kernels::{kernel_feature_rows, Kernel, KernelKind};
use crate::rng::mix_seed;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Protocol {
    KFold { k: usize },
    Shuffle { trials: usize, fraction: TrainFraction },
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::KFold { k: 10 }
    }
}

impl Protocol {
    pub fn splits(&self, n: usize, seed: u64) -> Result<Vec<Split>, EvaluateError> {
        match *self {
            Protocol::KFold { k } => kfold_splits(n, k, seed),
            Protocol::Shuffle { trials, fraction } => shuffle_split_indices(n, fraction, trials, seed),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::KFold { k } => write!(f, "kfold:{k}"),
            Protocol::Shuffle { trials, fraction } => {
                write!(f, "shuffle:{trials}:{}/{}", fraction.num, fraction.den)
            }
        }
    }
}

impl FromStr for Protocol {
    type Err = EvaluateError;

    /// `kfold[:k]` or `shuffle[:trials[:num/den]]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EvaluateError::InvalidProtocol(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["kfold"] => Ok(Protocol::KFold { k: 10 }),
            ["kfold", k] => Ok(Protocol::KFold { k: num(k)? }),
            ["shuffle"] => Ok(Protocol::Shuffle {
                trials: 100,
                fraction: TrainFraction::TWO_THIRDS,
            }),
            ["shuffle", t] => Ok(Protocol::Shuffle {
                trials: num(t)?,
                fraction: TrainFraction::TWO_THIRDS,
            }),
            ["shuffle", t, frac] => {
                let (a, b) = frac.split_once('/').ok_or_else(bad)?;
                Ok(Protocol::Shuffle {
                    trials: num(t)?,
                    fraction: TrainFraction::new(num(a)?, num(b)?)?,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Protocol {
    type Error = EvaluateError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Protocol> for String {
    fn from(p: Protocol) -> String {
        p.to_string()
    }
}

/// Featurization, optional kernel map and classifier of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub features: FeatureConfig,
    #[serde(default)]
    pub kernel: Option<KernelKind>,
    pub classifier: ClassifierConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub auroc: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub n_features: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub trial: usize,
    pub row: usize,
    pub score: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub protocol: Protocol,
    pub seed: u64,
    pub trials: Vec<TrialResult>,
    pub predictions: Vec<Prediction>,
}

impl ProtocolResult {
    fn sample(&self, name: &str, f: impl Fn(&TrialResult) -> f64) -> MetricSample {
        MetricSample {
            name: name.to_string(),
            values: self.trials.iter().map(f).collect(),
        }
    }

    pub fn auroc(&self) -> MetricSample {
        self.sample("auroc", |t| t.auroc)
    }

    pub fn train_acc(&self) -> MetricSample {
        self.sample("train_acc", |t| t.train_acc)
    }

    pub fn val_acc(&self) -> MetricSample {
        self.sample("val_acc", |t| t.val_acc)
    }

    pub fn metrics(&self) -> [MetricSample; 3] {
        [self.auroc(), self.train_acc(), self.val_acc()]
    }

    /// ROC over the validation predictions of every trial pooled together.
    pub fn pooled_roc(&self) -> Result<Vec<RocPoint>, EvaluateError> {
        let scores: Vec<f64> = self.predictions.iter().map(|p| p.score).collect();
        let labels: Vec<Label> = self.predictions.iter().map(|p| p.label).collect();
        roc_curve(&scores, &labels)
    }
}

/// Vocabulary of the training rows only; validation-only keys never enter it.
pub fn training_vocabulary(vectors: &[FeatureVector], train: &[usize]) -> FeatureVocabulary {
    let rows: Vec<FeatureVector> = train.iter().map(|&i| vectors[i].clone()).collect();
    FeatureVocabulary::from_vectors(&rows)
}

struct TrialOutput {
    result: TrialResult,
    predictions: Vec<Prediction>,
}

fn run_trial<T: Scalar>(
    pipeline: &PipelineSpec,
    vectors: &[FeatureVector],
    labels: &[Label],
    split: &Split,
    trial: usize,
    seed: u64,
) -> Result<TrialOutput, EvaluateError> {
    let pick = |idx: &[usize]| -> (Vec<FeatureVector>, Vec<Label>) {
        (
            idx.iter().map(|&i| vectors[i].clone()).collect(),
            idx.iter().map(|&i| labels[i]).collect(),
        )
    };
    let (train_v, train_y) = pick(&split.train);
    let (val_v, val_y) = pick(&split.validation);
    let (train_m, vocab) = build_matrix::<T>(&train_v, &train_y, None)?;
    let (val_m, _) = build_matrix::<T>(&val_v, &val_y, Some(&vocab))?;
    let (x_train, x_val) = match pipeline.kernel {
        None => (train_m.to_dense(), val_m.to_dense()),
        Some(kind) => {
            let kernel = Kernel::for_vocabulary(kind, &vocab);
            (
                kernel_feature_rows(&train_m, &train_m, &kernel)?,
                kernel_feature_rows(&train_m, &val_m, &kernel)?,
            )
        }
    };
    let model = Model::train(&pipeline.classifier, &x_train, &train_y, seed)?;
    let threshold = model.threshold();
    let train_scores = model.score_matrix(&x_train);
    let val_scores = model.score_matrix(&x_val);
    if val_scores.iter().chain(&train_scores).any(|s| !s.is_finite()) {
        return Err(EvaluateError::NonFiniteScore);
    }
    let result = TrialResult {
        trial,
        auroc: auroc(&val_scores, &val_y)?,
        train_acc: accuracy(&train_scores, &train_y, threshold)?,
        val_acc: accuracy(&val_scores, &val_y, threshold)?,
        n_features: vocab.len(),
    };
    let predictions = split
        .validation
        .iter()
        .zip(&val_scores)
        .map(|(&row, s)| Prediction {
            trial,
            row,
            score: s.as_f64(),
            label: labels[row],
        })
        .collect();
    Ok(TrialOutput { result, predictions })
}

/// Runs every trial of `protocol`; trial seeds derive from `(seed, trial)`.
pub fn run_protocol<T: Scalar>(
    pipeline: &PipelineSpec,
    vectors: &[FeatureVector],
    labels: &[Label],
    protocol: Protocol,
    seed: u64,
) -> Result<ProtocolResult, EvaluateError> {
    if vectors.len() != labels.len() {
        return Err(EvaluateError::LengthMismatch {
            scores: vectors.len(),
            labels: labels.len(),
        });
    }
    let splits = protocol.splits(vectors.len(), seed)?;
    let model_seeds = mix_seed(seed, u64::MAX);
    let outputs: Vec<TrialOutput> = splits
        .par_iter()
        .enumerate()
        .map(|(t, split)| {
            run_trial::<T>(pipeline, vectors, labels, split, t, mix_seed(model_seeds, t as u64)).map_err(|e| {
                EvaluateError::Trial {
                    trial: t,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<_, _>>()?;
    let mut trials = Vec::with_capacity(outputs.len());
    let mut predictions = Vec::new();
    for o in outputs {
        trials.push(o.result);
        predictions.extend(o.predictions);
    }
    Ok(ProtocolResult {
        protocol,
        seed,
        trials,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_strings() {
        assert_eq!("kfold:10".parse::<Protocol>().unwrap(), Protocol::KFold { k: 10 });
        assert_eq!(
            "shuffle:100:2/3".parse::<Protocol>().unwrap(),
            Protocol::Shuffle {
                trials: 100,
                fraction: TrainFraction::TWO_THIRDS
            }
        );
        assert_eq!("shuffle:5".parse::<Protocol>().unwrap().to_string(), "shuffle:5:2/3");
        assert!("shuffle:5:3/2".parse::<Protocol>().is_err());
        assert!("loo".parse::<Protocol>().is_err());
    }
}
