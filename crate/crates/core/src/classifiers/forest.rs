use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, DecisionTree, MaxFeatures, SplitCriterion, TreeParams};
use super::{check_training_data, ClassifierError};
use crate::featurizer::{DenseMatrix, Label};
use crate::rng::{mix_seed, seeded};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub criterion: SplitCriterion,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            criterion: SplitCriterion::Gini,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel<T> {
    pub config: ForestConfig,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<DecisionTree<T>>,
}

impl<T: Scalar> ForestModel<T> {
    /// Mean of the per-tree leaf probabilities.
    pub fn score(&self, row: &[T]) -> T {
        let sum: T = self.trees.iter().map(|t| t.predict(row)).sum();
        sum / T::of_usize(self.trees.len())
    }
}

/// Row multiplicities of the resample used by tree `index`.
pub fn bootstrap_weights(n: usize, seed: u64, index: usize, bootstrap: bool) -> Vec<u32> {
    if !bootstrap {
        return vec![1; n];
    }
    let mut rng = seeded(mix_seed(seed, index as u64));
    let mut w = vec![0u32; n];
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1;
    }
    w
}

pub fn train_forest<T: Scalar>(
    x: &DenseMatrix<T>,
    y: &[Label],
    config: &ForestConfig,
    seed: u64,
) -> Result<ForestModel<T>, ClassifierError> {
    check_training_data(x, y)?;
    if config.n_trees == 0 {
        return Err(ClassifierError::InvalidConfig("forest needs at least one tree".into()));
    }
    let params = TreeParams {
        criterion: config.criterion,
        max_features: config.max_features,
    };
    let n = x.rows();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|i| {
            // resample and split draws come from separate streams
            let weights = bootstrap_weights(n, seed, i, config.bootstrap);
            let mut rng = seeded(mix_seed(mix_seed(seed, i as u64), u64::MAX));
            grow_tree(x, y, &weights, &params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        config: *config,
        seed,
        n_features: x.cols(),
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::tree::TreeNode;

    fn leaf(p: f64) -> DecisionTree<f64> {
        DecisionTree {
            nodes: vec![TreeNode::Leaf { probability: p }],
        }
    }

    fn forest(ps: &[f64]) -> ForestModel<f64> {
        ForestModel {
            config: ForestConfig::default(),
            seed: 0,
            n_features: 1,
            trees: ps.iter().map(|&p| leaf(p)).collect(),
        }
    }

    #[test]
    fn score_is_mean_of_trees() {
        assert_eq!(forest(&[1.0, 1.0, 1.0]).score(&[0.0]), 1.0);
        assert_eq!(forest(&[1.0, 0.0, 1.0, 0.0]).score(&[0.0]), 0.5);
        assert!((forest(&[0.2, 0.5, 0.8]).score(&[0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(forest(&[0.25, 0.75, 0.5]).score(&[0.0]), 0.5);
    }

    fn separable() -> (DenseMatrix<f64>, Vec<Label>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let on = i % 3 == 0;
            rows.push(vec![(i % 5) as f64, if on { 1.0 } else { 0.0 }, (i % 7) as f64]);
            y.push(if on { Label::Positive } else { Label::Negative });
        }
        (DenseMatrix::from_rows(&rows), y)
    }

    #[test]
    fn trees_fit_their_bootstrap_sample() {
        let (x, y) = separable();
        let cfg = ForestConfig {
            n_trees: 20,
            ..ForestConfig::default()
        };
        let m = train_forest(&x, &y, &cfg, 11).unwrap();
        assert_eq!(m.trees.len(), 20);
        for (t, tree) in m.trees.iter().enumerate() {
            let w = bootstrap_weights(x.rows(), 11, t, true);
            for i in (0..x.rows()).filter(|&i| w[i] > 0) {
                assert_eq!(tree.predict(x.row(i)), y[i].target::<f64>());
            }
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let (x, y) = separable();
        let cfg = ForestConfig {
            n_trees: 10,
            criterion: SplitCriterion::Entropy,
            ..ForestConfig::default()
        };
        let a = train_forest(&x, &y, &cfg, 5).unwrap();
        let b = train_forest(&x, &y, &cfg, 5).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn rejects_degenerate_input() {
        let x = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]]);
        let cfg = ForestConfig::default();
        assert!(matches!(
            train_forest(&x, &[Label::Positive, Label::Positive], &cfg, 0),
            Err(ClassifierError::SingleClass)
        ));
        let empty = DenseMatrix::<f64>::zeros(0, 1);
        assert!(matches!(
            train_forest(&empty, &[], &cfg, 0),
            Err(ClassifierError::Empty)
        ));
    }
}
