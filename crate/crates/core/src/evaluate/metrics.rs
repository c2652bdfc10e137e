use serde::{Deserialize, Serialize};

use super::EvaluateError;
use crate::featurizer::Label;
use crate::Scalar;

fn check<T>(scores: &[T], labels: &[Label]) -> Result<(), EvaluateError> {
    if scores.len() != labels.len() {
        return Err(EvaluateError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(EvaluateError::Empty);
    }
    Ok(())
}

/// Area under the ROC curve as the Mann-Whitney statistic, ties counted as one half.
pub fn auroc<T: Scalar>(scores: &[T], labels: &[Label]) -> Result<f64, EvaluateError> {
    check(scores, labels)?;
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvaluateError::SingleClass);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvaluateError::NonFiniteScore);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks; positives' rank sum gives U
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let mid = (start + end + 1) as f64 / 2.0;
        let pos = order[start..end].iter().filter(|&&i| labels[i].is_positive()).count();
        rank_sum += mid * pos as f64;
        start = end;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Fraction of rows whose `score >= threshold` agrees with the label.
pub fn accuracy<T: Scalar>(scores: &[T], labels: &[Label], threshold: T) -> Result<f64, EvaluateError> {
    check(scores, labels)?;
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(s, l)| (**s >= threshold) == l.is_positive())
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Rows scoring at or above this value are called positive.
    pub threshold: f64,
}

/// ROC points from the strictest threshold (`+inf`) down to the lowest score.
pub fn roc_curve<T: Scalar>(scores: &[T], labels: &[Label]) -> Result<Vec<RocPoint>, EvaluateError> {
    check(scores, labels)?;
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvaluateError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold: s.as_f64(),
        });
    }
    Ok(points)
}

/// Trapezoidal area under a ROC curve.
pub fn roc_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[0.9, 0.8, 0.1, 0.2], &[P, P, N, N]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.3; 4], &[P, N, P, N]).unwrap(), 0.5);
        let v = auroc(&[0.9, 0.8, 0.7, 0.6], &[P, P, N, P]).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(auroc(&[0.1, 0.2], &[P, P]), Err(EvaluateError::SingleClass)));
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0.9, 0.1], &[P, N], 0.5).unwrap(), 1.0);
        assert_eq!(accuracy(&[0.1, 0.9], &[P, N], 0.5).unwrap(), 0.0);
        assert_eq!(accuracy(&[1.0, -1.0, 2.0, 0.5], &[P, N, P, N], 0.0).unwrap(), 0.75);
    }

    #[test]
    fn roc_area_matches_auroc_with_ties() {
        let scores = [0.5, 0.5, 0.9, 0.1, 0.5, 0.7];
        let labels = [P, N, P, N, N, P];
        let pts = roc_curve(&scores, &labels).unwrap();
        assert_eq!(pts.first().unwrap().tpr, 0.0);
        assert_eq!((pts.last().unwrap().fpr, pts.last().unwrap().tpr), (1.0, 1.0));
        assert!((roc_area(&pts) - auroc(&scores, &labels).unwrap()).abs() < 1e-15);
    }
}
