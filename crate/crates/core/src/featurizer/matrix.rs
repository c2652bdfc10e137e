use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::features::{FeatureKey, FeatureVector};
use super::FeatureError;
use crate::Scalar;

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_sign(v: i64) -> Option<Label> {
        match v {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    /// 1 for positive, 0 for negative.
    pub fn target<T: Scalar>(self) -> T {
        if self.is_positive() {
            T::one()
        } else {
            T::zero()
        }
    }
}

/// Frozen, ordered feature columns: ascending mass, ties by key text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<FeatureKey>", into = "Vec<FeatureKey>")]
pub struct FeatureVocabulary {
    keys: Vec<FeatureKey>,
    index: HashMap<String, usize>,
}

impl From<Vec<FeatureKey>> for FeatureVocabulary {
    fn from(keys: Vec<FeatureKey>) -> Self {
        FeatureVocabulary::from_ordered(keys)
    }
}

impl From<FeatureVocabulary> for Vec<FeatureKey> {
    fn from(v: FeatureVocabulary) -> Self {
        v.keys
    }
}

impl FeatureVocabulary {
    pub fn from_keys(keys: impl IntoIterator<Item = FeatureKey>) -> Self {
        let unique: BTreeSet<FeatureKey> = keys.into_iter().collect();
        let mut keys: Vec<FeatureKey> = unique.into_iter().collect();
        keys.sort_by(|a, b| a.mass().total_cmp(&b.mass()).then_with(|| a.text().cmp(b.text())));
        Self::from_ordered(keys)
    }

    /// Takes `keys` in the given order; the caller guarantees uniqueness.
    pub fn from_ordered(keys: Vec<FeatureKey>) -> Self {
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.text().to_string(), i))
            .collect();
        FeatureVocabulary { keys, index }
    }

    pub fn from_vectors(vectors: &[FeatureVector]) -> Self {
        Self::from_keys(vectors.iter().flat_map(|v| v.keys().cloned()))
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[FeatureKey] {
        &self.keys
    }

    pub fn key(&self, col: usize) -> &FeatureKey {
        &self.keys[col]
    }

    pub fn index_of(&self, text: &str) -> Option<usize> {
        self.index.get(text).copied()
    }

    /// Sparse row of `v` over this vocabulary; unknown keys are dropped.
    pub fn encode<T: Scalar>(&self, v: &FeatureVector) -> SparseRow<T> {
        let mut entries: Vec<(usize, T)> = v
            .iter()
            .filter_map(|(k, c)| self.index_of(k.text()).map(|i| (i, T::of(f64::from(c)))))
            .collect();
        entries.sort_by_key(|&(i, _)| i);
        SparseRow {
            dim: self.len(),
            entries,
        }
    }
}

/// Sparse row with ascending, unique column indices and explicit dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRow<T> {
    pub dim: usize,
    pub entries: Vec<(usize, T)>,
}

impl<T: Scalar> SparseRow<T> {
    pub fn new(dim: usize, mut entries: Vec<(usize, T)>) -> Self {
        entries.retain(|(_, v)| !v.is_zero());
        entries.sort_by_key(|&(i, _)| i);
        SparseRow { dim, entries }
    }

    pub fn from_dense(values: &[T]) -> Self {
        SparseRow {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn dot(&self, other: &SparseRow<T>) -> T {
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        while i < self.entries.len() && j < other.entries.len() {
            let (ci, vi) = self.entries[i];
            let (cj, vj) = other.entries[j];
            match ci.cmp(&cj) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += vi * vj;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> T {
        self.entries.iter().map(|&(_, v)| v * v).sum::<T>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    /// Rows selected by `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> DenseMatrix<T> {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Labeled sparse rows aligned to one vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMatrix<T> {
    pub rows: Vec<SparseRow<T>>,
    pub labels: Vec<Label>,
    pub ids: Vec<String>,
    pub n_cols: usize,
}

impl<T: Scalar> DatasetMatrix<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.rows.len(), self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in &row.entries {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn select(&self, idx: &[usize]) -> DatasetMatrix<T> {
        DatasetMatrix {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            n_cols: self.n_cols,
        }
    }

    /// Converts rows back to count vectors over `vocab`; values must be positive integers.
    pub fn to_feature_vectors(&self, vocab: &FeatureVocabulary) -> Result<Vec<FeatureVector>, FeatureError> {
        if vocab.len() != self.n_cols {
            return Err(FeatureError::VocabularyMismatch {
                expected: vocab.len(),
                found: self.n_cols,
            });
        }
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.entries
                    .iter()
                    .map(|&(c, v)| {
                        let x = v.as_f64();
                        if x < 1.0 || x.fract() != 0.0 || x > f64::from(u32::MAX) {
                            Err(FeatureError::NonCountValue { row: r, col: c })
                        } else {
                            Ok((vocab.key(c).clone(), x as u32))
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Aligns count vectors to a vocabulary. Without `vocab`, one is built from
/// `vectors` (training mode); with it, keys outside the vocabulary are dropped.
pub fn build_matrix<T: Scalar>(
    vectors: &[FeatureVector],
    labels: &[Label],
    vocab: Option<&FeatureVocabulary>,
) -> Result<(DatasetMatrix<T>, FeatureVocabulary), FeatureError> {
    if vectors.len() != labels.len() {
        return Err(FeatureError::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    let vocab = match vocab {
        Some(v) => v.clone(),
        None => FeatureVocabulary::from_vectors(vectors),
    };
    let rows = vectors.iter().map(|v| vocab.encode(v)).collect();
    let matrix = DatasetMatrix {
        rows,
        labels: labels.to_vec(),
        ids: (0..vectors.len()).map(|i| format!("row{i}")).collect(),
        n_cols: vocab.len(),
    };
    Ok((matrix, vocab))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(items: &[(&str, f64, u32)]) -> FeatureVector {
        items
            .iter()
            .map(|&(t, m, c)| (FeatureKey::new(t, m), c))
            .collect()
    }

    #[test]
    fn empty_input() {
        let (m, v) = build_matrix::<f64>(&[], &[], None).unwrap();
        assert!(m.is_empty());
        assert!(v.is_empty());
    }

    #[test]
    fn shared_key_shares_column() {
        let a = fv(&[("h0.d0|A;", 1.0, 2), ("h0.d0|B;", 2.0, 1)]);
        let b = fv(&[("h0.d0|A;", 1.0, 1)]);
        let (m, v) = build_matrix::<f64>(&[a, b], &[Label::Positive, Label::Negative], None).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(m.rows[0].entries, vec![(0, 2.0), (1, 1.0)]);
        assert_eq!(m.rows[1].entries, vec![(0, 1.0)]);
    }

    #[test]
    fn mass_then_text_order() {
        let v = FeatureVocabulary::from_keys([
            FeatureKey::new("z", 1.0),
            FeatureKey::new("b", 5.0),
            FeatureKey::new("a", 5.0),
        ]);
        let order: Vec<&str> = v.keys().iter().map(|k| k.text()).collect();
        assert_eq!(order, vec!["z", "a", "b"]);
        assert_eq!(v.index_of("b"), Some(2));
    }

    #[test]
    fn validation_mode_drops_unseen_keys() {
        let train = fv(&[("k1", 1.0, 3)]);
        let (_, vocab) = build_matrix::<f64>(&[train], &[Label::Positive], None).unwrap();
        let val = fv(&[("k1", 1.0, 3), ("unseen", 2.0, 4)]);
        let (m, _) = build_matrix::<f64>(&[val.clone()], &[Label::Negative], Some(&vocab)).unwrap();
        assert_eq!(m.rows[0].entries, vec![(0, 3.0)]);
        assert!(m.rows[0].norm() < (9.0f64 + 16.0).sqrt());
        assert_eq!(m.n_cols, 1);
    }

    #[test]
    fn length_mismatch() {
        let err = build_matrix::<f64>(&[FeatureVector::new()], &[], None).unwrap_err();
        assert_eq!(err, FeatureError::LengthMismatch { vectors: 1, labels: 0 });
    }

    #[test]
    fn round_trip_to_feature_vectors() {
        let a = fv(&[("x", 1.0, 2), ("y", 3.0, 5)]);
        let (m, v) = build_matrix::<f32>(&[a.clone()], &[Label::Positive], None).unwrap();
        assert_eq!(m.to_feature_vectors(&v).unwrap(), vec![a]);
    }

    #[test]
    fn sparse_row_ops() {
        let a = SparseRow::new(4, vec![(3, 1.0), (0, 2.0), (1, 0.0)]);
        assert_eq!(a.entries, vec![(0, 2.0), (3, 1.0)]);
        let b = SparseRow::from_dense(&[1.0, 5.0, 0.0, 1.0]);
        assert_eq!(a.dot(&b), 3.0);
        assert_eq!(a.to_dense(), vec![2.0, 0.0, 0.0, 1.0]);
    }
}
