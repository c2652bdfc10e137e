use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvaluateError;
use crate::rng::{mix_seed, seeded};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Exact training fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainFraction {
    pub num: usize,
    pub den: usize,
}

impl TrainFraction {
    pub const TWO_THIRDS: TrainFraction = TrainFraction { num: 2, den: 3 };

    pub fn new(num: usize, den: usize) -> Result<Self, EvaluateError> {
        if den == 0 || num == 0 || num >= den {
            return Err(EvaluateError::InvalidFraction { num, den });
        }
        Ok(TrainFraction { num, den })
    }

    /// `⌈n * num / den⌉`.
    pub fn train_size(self, n: usize) -> usize {
        (n * self.num).div_ceil(self.den)
    }
}

impl Default for TrainFraction {
    fn default() -> Self {
        TrainFraction::TWO_THIRDS
    }
}

/// Shuffled partition of `0..n` into `k` folds; the first `n % k` folds get one extra index.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvaluateError> {
    if k < 2 || n < k {
        return Err(EvaluateError::TooFewRows { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(idx[at..at + size].to_vec());
        at += size;
    }
    Ok(folds)
}

/// Train/validation splits where fold `f` is held out.
pub fn kfold_splits(n: usize, k: usize, seed: u64) -> Result<Vec<Split>, EvaluateError> {
    let folds = kfold_indices(n, k, seed)?;
    Ok((0..k)
        .map(|f| Split {
            train: folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, fold)| fold.iter().copied())
                .collect(),
            validation: folds[f].clone(),
        })
        .collect())
}

/// Independent random splits; trial `t` depends only on `(seed, t)`.
pub fn shuffle_split_indices(
    n: usize,
    fraction: TrainFraction,
    trials: usize,
    seed: u64,
) -> Result<Vec<Split>, EvaluateError> {
    let n_train = fraction.train_size(n);
    if n < 3 || n_train >= n {
        return Err(EvaluateError::TooFewRows { n, k: 3 });
    }
    Ok((0..trials)
        .map(|t| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut seeded(mix_seed(seed, t as u64)));
            let validation = idx.split_off(n_train);
            Split { train: idx, validation }
        })
        .collect())
}
