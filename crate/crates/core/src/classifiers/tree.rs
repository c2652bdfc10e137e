use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::featurizer::{DenseMatrix, Label};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SplitCriterion {
    #[default]
    Gini,
    Entropy,
}

impl SplitCriterion {
    /// Impurity of a node holding `pos` positive weight out of `total`.
    pub fn impurity<T: Scalar>(self, pos: T, total: T) -> T {
        if total <= T::zero() {
            return T::zero();
        }
        let p = pos / total;
        let q = T::one() - p;
        match self {
            SplitCriterion::Gini => T::one() - p * p - q * q,
            SplitCriterion::Entropy => {
                let term = |x: T| if x > T::zero() { -x * x.log2() } else { T::zero() };
                term(p) + term(q)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// ⌈√F⌉ candidate features per split.
    #[default]
    Sqrt,
    All,
}

impl MaxFeatures {
    pub fn count(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().ceil().max(1.0) as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode<T> {
    Leaf {
        /// Positive-class fraction of the training weight reaching this leaf.
        probability: T,
    },
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// Binary tree stored as a node arena; node 0 is the root.
/// Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T> {
    pub nodes: Vec<TreeNode<T>>,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn predict(&self, row: &[T]) -> T {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { probability } => return *probability,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[TreeNode<T>], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

pub(crate) struct TreeParams {
    pub criterion: SplitCriterion,
    pub max_features: MaxFeatures,
}

struct Candidate<T> {
    feature: usize,
    threshold: T,
    impurity: T,
}

/// Grows a tree until every leaf is pure or no sampled feature can split it.
/// `weights[i]` is the multiplicity of row `i` (0 excludes it).
pub(crate) fn grow_tree<T: Scalar, R: Rng>(
    x: &DenseMatrix<T>,
    y: &[Label],
    weights: &[u32],
    params: &TreeParams,
    rng: &mut R,
) -> DecisionTree<T> {
    let n_features = x.cols();
    let mtry = params.max_features.count(n_features);
    let root: Vec<usize> = (0..x.rows()).filter(|&i| weights[i] > 0).collect();
    let mut nodes: Vec<TreeNode<T>> = vec![TreeNode::Leaf {
        probability: T::zero(),
    }];
    let mut stack = vec![(0usize, root)];
    let mut features: Vec<usize> = (0..n_features).collect();
    let mut column: Vec<(T, T, T)> = Vec::new();

    while let Some((slot, rows)) = stack.pop() {
        let (mut pos, mut total) = (T::zero(), T::zero());
        for &i in &rows {
            let w = T::of(f64::from(weights[i]));
            total += w;
            if y[i].is_positive() {
                pos += w;
            }
        }
        let probability = if total > T::zero() { pos / total } else { T::zero() };
        nodes[slot] = TreeNode::Leaf { probability };
        if pos.is_zero() || pos == total {
            continue;
        }

        // Draw features without replacement until `mtry` non-constant ones are found.
        let mut chosen: Vec<usize> = Vec::with_capacity(mtry);
        let mut drawn = 0;
        while chosen.len() < mtry && drawn < n_features {
            let k = rng.random_range(drawn..n_features);
            features.swap(drawn, k);
            let f = features[drawn];
            drawn += 1;
            let first = x.get(rows[0], f);
            if rows.iter().any(|&i| x.get(i, f) != first) {
                chosen.push(f);
            }
        }
        chosen.sort_unstable();

        let mut best: Option<Candidate<T>> = None;
        for &f in &chosen {
            column.clear();
            column.extend(rows.iter().map(|&i| {
                let w = T::of(f64::from(weights[i]));
                let p = if y[i].is_positive() { w } else { T::zero() };
                (x.get(i, f), w, p)
            }));
            column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let (mut lw, mut lp) = (T::zero(), T::zero());
            for k in 0..column.len() - 1 {
                lw += column[k].1;
                lp += column[k].2;
                let (a, b) = (column[k].0, column[k + 1].0);
                if a == b {
                    continue;
                }
                let rw = total - lw;
                let rp = pos - lp;
                let impurity = (lw * params.criterion.impurity(lp, lw)
                    + rw * params.criterion.impurity(rp, rw))
                    / total;
                if best.as_ref().is_none_or(|c| impurity < c.impurity) {
                    let mid = (a + b) / T::of(2.0);
                    let threshold = if mid < b { mid } else { a };
                    best = Some(Candidate {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }

        if let Some(c) = best {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| x.get(i, c.feature) <= c.threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(TreeNode::Leaf { probability: T::zero() });
            nodes.push(TreeNode::Leaf { probability: T::zero() });
            nodes[slot] = TreeNode::Split {
                feature: c.feature,
                threshold: c.threshold,
                left,
                right,
            };
            stack.push((right, right_rows));
            stack.push((left, left_rows));
        }
    }
    DecisionTree { nodes }
}
