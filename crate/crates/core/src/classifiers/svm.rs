use serde::{Deserialize, Serialize};

use super::{check_training_data, ClassifierError};
use crate::featurizer::{DenseMatrix, Label};
use crate::Scalar;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum SvmKernel {
    Linear,
    Rbf { gamma: f64 },
    /// Rows are already kernel values against the training rows.
    Precomputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub kernel: SvmKernel,
    pub c: f64,
    /// Cost multiplier applied to positive examples.
    pub j: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            kernel: SvmKernel::Linear,
            c: 1.0,
            j: 1.0,
            tolerance: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

impl SvmConfig {
    pub fn bound(&self, label: Label) -> f64 {
        if label.is_positive() {
            self.j * self.c
        } else {
            self.c
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportVector<T> {
    /// Training row index.
    pub index: usize,
    pub label: Label,
    pub alpha: T,
    /// Stored row, empty for precomputed kernels.
    pub row: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel<T> {
    pub config: SvmConfig,
    pub support: Vec<SupportVector<T>>,
    pub bias: T,
    pub iterations: usize,
}

fn kernel_value<T: Scalar>(kernel: SvmKernel, a: &[T], b: &[T]) -> T {
    match kernel {
        SvmKernel::Linear | SvmKernel::Precomputed => a.iter().zip(b).map(|(x, y)| *x * *y).sum(),
        SvmKernel::Rbf { gamma } => {
            let d: T = a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let t = *x - *y;
                    t * t
                })
                .sum();
            (-T::of(gamma) * d).exp()
        }
    }
}

impl<T: Scalar> SvmModel<T> {
    /// Decision value `sum_i alpha_i y_i K(x_i, row) + bias`.
    pub fn score(&self, row: &[T]) -> T {
        let mut acc = self.bias;
        for sv in &self.support {
            let k = match self.config.kernel {
                SvmKernel::Precomputed => row[sv.index],
                kernel => kernel_value(kernel, &sv.row, row),
            };
            acc += sv.alpha * T::of(f64::from(sv.label.sign())) * k;
        }
        acc
    }
}

/// Solves the soft-margin dual with second-order working set selection.
/// With a precomputed kernel `x` must be the square training Gram matrix.
pub fn train_svm<T: Scalar>(
    x: &DenseMatrix<T>,
    y: &[Label],
    config: &SvmConfig,
) -> Result<SvmModel<T>, ClassifierError> {
    check_training_data(x, y)?;
    if !(config.c > 0.0) || !(config.j > 0.0) || !(config.tolerance > 0.0) {
        return Err(ClassifierError::InvalidConfig(
            "C, j and tolerance must be positive".into(),
        ));
    }
    if let SvmKernel::Rbf { gamma } = config.kernel {
        if !(gamma > 0.0) {
            return Err(ClassifierError::InvalidConfig("rbf gamma must be positive".into()));
        }
    }
    let n = x.rows();
    if config.kernel == SvmKernel::Precomputed && x.cols() != n {
        return Err(ClassifierError::InvalidConfig(format!(
            "precomputed kernel must be {n}x{n}, got {n}x{}",
            x.cols()
        )));
    }
    let k: Vec<f64> = {
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = match config.kernel {
                    SvmKernel::Precomputed => x.get(i, j).as_f64(),
                    kernel => kernel_value(kernel, x.row(i), x.row(j)).as_f64(),
                };
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    };
    let ys: Vec<f64> = y.iter().map(|l| f64::from(l.sign())).collect();
    let bound: Vec<f64> = y.iter().map(|&l| config.bound(l)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];

    let mut iterations = 0;
    loop {
        // i maximises -y G over the "up" set
        let mut gmax = f64::NEG_INFINITY;
        let mut sel_i = None;
        for t in 0..n {
            let up = if ys[t] > 0.0 { alpha[t] < bound[t] } else { alpha[t] > 0.0 };
            if up && -ys[t] * grad[t] >= gmax {
                gmax = -ys[t] * grad[t];
                sel_i = Some(t);
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut sel_j = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = sel_i {
            for t in 0..n {
                let low = if ys[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < bound[t] };
                if !low {
                    continue;
                }
                let v = -ys[t] * grad[t];
                gmax2 = gmax2.max(-v);
                let diff = gmax - v;
                if diff > 0.0 {
                    let mut quad = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                    if quad <= 0.0 {
                        quad = TAU;
                    }
                    let obj = -diff * diff / quad;
                    if obj <= obj_min {
                        obj_min = obj;
                        sel_j = Some(t);
                    }
                }
            }
        }
        let residual = gmax + gmax2;
        let (i, j) = match (sel_i, sel_j) {
            (Some(i), Some(j)) if residual >= config.tolerance => (i, j),
            _ => break,
        };
        if iterations >= config.max_iterations {
            return Err(ClassifierError::NotConverged {
                iterations,
                residual,
            });
        }
        iterations += 1;

        let (ci, cj) = (bound[i], bound[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = k[i * n + j];
        if ys[i] != ys[j] {
            let mut quad = k[i * n + i] + k[j * n + j] + 2.0 * (ys[i] * ys[j] * kij);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let mut quad = k[i * n + i] + k[j * n + j] - 2.0 * (ys[i] * ys[j] * kij);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += ys[t] * (ys[i] * k[t * n + i] * di + ys[j] * k[t * n + j] * dj);
        }
    }

    // bias from free vectors, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        let at_upper = alpha[t] >= bound[t];
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if ys[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if at_lower {
            if ys[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };

    let support = (0..n)
        .filter(|&t| alpha[t] > 0.0)
        .map(|t| SupportVector {
            index: t,
            label: y[t],
            alpha: T::of(alpha[t]),
            row: match config.kernel {
                SvmKernel::Precomputed => Vec::new(),
                _ => x.row(t).to_vec(),
            },
        })
        .collect();
    Ok(SvmModel {
        config: *config,
        support,
        bias: T::of(-rho),
        iterations,
    })
}
