//! Cosine and neighborhood-pair decomposition kernels over sparse count
//! rows, Gram matrices, and the empirical kernel map used to hand
//! kernelized data to any classifier.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurizer::{DatasetMatrix, DenseMatrix, FeatureVocabulary, SparseRow};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("rows have different dimensions ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("block layout covers {expected} columns but rows have {found}")]
    MissingBlocks { expected: usize, found: usize },
    #[error("kernel needs at least one row")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Cosine,
    Nspdk,
}

/// Kernel value plus a flag raised when a zero-norm row made the value degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity<T> {
    pub value: T,
    pub zero_norm: bool,
}

/// Maps each vocabulary column to its (height, distance) block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    block_of: Vec<usize>,
    names: Vec<String>,
}

impl BlockLayout {
    pub fn from_vocabulary(vocab: &FeatureVocabulary) -> Self {
        let mut names: Vec<String> = vocab.keys().iter().map(|k| k.block().to_string()).collect();
        names.sort();
        names.dedup();
        let block_of = vocab
            .keys()
            .iter()
            .map(|k| names.binary_search_by(|n| n.as_str().cmp(k.block())).expect("block listed"))
            .collect();
        BlockLayout { block_of, names }
    }

    pub fn n_blocks(&self) -> usize {
        self.names.len()
    }

    pub fn n_cols(&self) -> usize {
        self.block_of.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn block_of(&self, col: usize) -> usize {
        self.block_of[col]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Cosine,
    Nspdk(BlockLayout),
}

impl Kernel {
    pub fn kind(&self) -> KernelKind {
        match self {
            Kernel::Cosine => KernelKind::Cosine,
            Kernel::Nspdk(_) => KernelKind::Nspdk,
        }
    }

    pub fn for_vocabulary(kind: KernelKind, vocab: &FeatureVocabulary) -> Kernel {
        match kind {
            KernelKind::Cosine => Kernel::Cosine,
            KernelKind::Nspdk => Kernel::Nspdk(BlockLayout::from_vocabulary(vocab)),
        }
    }

    pub fn eval<T: Scalar>(&self, x: &SparseRow<T>, y: &SparseRow<T>) -> Result<Similarity<T>, KernelError> {
        match self {
            Kernel::Cosine => cosine_kernel(x, y),
            Kernel::Nspdk(layout) => nspdk_kernel(x, y, layout),
        }
    }
}

fn check_dims<T>(x: &SparseRow<T>, y: &SparseRow<T>) -> Result<(), KernelError> {
    if x.dim != y.dim {
        return Err(KernelError::DimensionMismatch {
            left: x.dim,
            right: y.dim,
        });
    }
    Ok(())
}

/// `dot / sqrt(|x|^2 |y|^2)`, which is exactly 1 when `x == y`.
fn normalized<T: Scalar>(dot: T, xx: T, yy: T) -> T {
    (dot / (xx * yy).sqrt()).min(T::one())
}

/// `x·y / (|x| |y|)`; 0 with `zero_norm` set when either row is empty.
pub fn cosine_kernel<T: Scalar>(x: &SparseRow<T>, y: &SparseRow<T>) -> Result<Similarity<T>, KernelError> {
    check_dims(x, y)?;
    let xx = x.dot(x);
    let yy = y.dot(y);
    if xx.is_zero() || yy.is_zero() {
        return Ok(Similarity {
            value: T::zero(),
            zero_norm: true,
        });
    }
    Ok(Similarity {
        value: normalized(x.dot(y), xx, yy),
        zero_norm: false,
    })
}

/// Mean of per-block cosine similarities. A block counts when either row
/// has mass in it; a block present in only one row contributes 0.
pub fn nspdk_kernel<T: Scalar>(
    x: &SparseRow<T>,
    y: &SparseRow<T>,
    layout: &BlockLayout,
) -> Result<Similarity<T>, KernelError> {
    check_dims(x, y)?;
    if layout.n_cols() != x.dim {
        return Err(KernelError::MissingBlocks {
            expected: layout.n_cols(),
            found: x.dim,
        });
    }
    let nb = layout.n_blocks();
    let mut xx = vec![T::zero(); nb];
    let mut yy = vec![T::zero(); nb];
    let mut xy = vec![T::zero(); nb];
    for &(c, v) in &x.entries {
        xx[layout.block_of(c)] += v * v;
    }
    for &(c, v) in &y.entries {
        yy[layout.block_of(c)] += v * v;
    }
    let (mut i, mut j) = (0, 0);
    while i < x.entries.len() && j < y.entries.len() {
        let (ci, vi) = x.entries[i];
        let (cj, vj) = y.entries[j];
        match ci.cmp(&cj) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                xy[layout.block_of(ci)] += vi * vj;
                i += 1;
                j += 1;
            }
        }
    }
    let mut total = T::zero();
    let mut active = 0usize;
    let mut zero_norm = false;
    for b in 0..nb {
        let (a, c) = (xx[b], yy[b]);
        if a.is_zero() && c.is_zero() {
            continue;
        }
        active += 1;
        if a.is_zero() || c.is_zero() {
            zero_norm = true;
            continue;
        }
        total += normalized(xy[b], a, c);
    }
    if active == 0 {
        return Ok(Similarity {
            value: T::zero(),
            zero_norm: true,
        });
    }
    Ok(Similarity {
        value: total / T::of_usize(active),
        zero_norm,
    })
}

/// Symmetric similarity matrix with row ids aligned to the source dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T> {
    pub values: DenseMatrix<T>,
    pub ids: Vec<String>,
}

/// All pairwise similarities. Each unordered pair is evaluated once and
/// mirrored; entries do not depend on the thread schedule.
pub fn gram_matrix<T: Scalar>(data: &DatasetMatrix<T>, kernel: &Kernel) -> Result<GramMatrix<T>, KernelError> {
    let n = data.len();
    if n == 0 {
        return Err(KernelError::Empty);
    }
    let upper: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| kernel.eval(&data.rows[i], &data.rows[j]).map(|s| s.value))
                .collect::<Result<Vec<T>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let mut values = DenseMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            values.set(i, i + off, v);
            values.set(i + off, i, v);
        }
    }
    Ok(GramMatrix {
        values,
        ids: data.ids.clone(),
    })
}

/// Empirical kernel map: row `i` holds the similarity of `eval` row `i` to
/// every `train` row.
pub fn kernel_feature_rows<T: Scalar>(
    train: &DatasetMatrix<T>,
    eval: &DatasetMatrix<T>,
    kernel: &Kernel,
) -> Result<DenseMatrix<T>, KernelError> {
    if train.n_cols != eval.n_cols {
        return Err(KernelError::DimensionMismatch {
            left: train.n_cols,
            right: eval.n_cols,
        });
    }
    let rows: Vec<Vec<T>> = eval
        .rows
        .par_iter()
        .map(|e| {
            train
                .rows
                .iter()
                .map(|t| kernel.eval(e, t).map(|s| s.value))
                .collect::<Result<Vec<T>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(DenseMatrix::from_vec(
        eval.len(),
        train.len(),
        rows.into_iter().flatten().collect(),
    ))
}

/// Writes `n`, then `n` lines of `n` values with 17 significant digits.
pub fn write_gram<T: Scalar, W: Write>(mut w: W, gram: &GramMatrix<T>) -> io::Result<()> {
    let n = gram.values.rows();
    writeln!(w, "{n}")?;
    for i in 0..n {
        let line: Vec<String> = gram
            .values
            .row(i)
            .iter()
            .map(|v| format!("{:.16e}", v.as_f64()))
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_gram<R: BufRead>(r: R) -> io::Result<DenseMatrix<f64>> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut lines = r.lines();
    let n: usize = lines
        .next()
        .ok_or_else(|| bad("missing header".into()))??
        .trim()
        .parse()
        .map_err(|_| bad("bad header".into()))?;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        let line = lines.next().ok_or_else(|| bad(format!("missing row {i}")))??;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("bad value in row {i}")))?;
        if row.len() != n {
            return Err(bad(format!("row {i} has {} values, expected {n}", row.len())));
        }
        data.extend(row);
    }
    Ok(DenseMatrix::from_vec(n, n, data))
}
