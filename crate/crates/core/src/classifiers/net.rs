use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_data, ClassifierError};
use crate::featurizer::{DenseMatrix, Label};
use crate::rng::{mix_seed, seeded};
use crate::Scalar;

pub const MLP_HIDDEN: usize = 3;
pub const PARTITIONED_HIDDEN: usize = 4;
const INIT_RANGE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetConfig {
    /// Initial learning rate; epoch `e` uses `learning_rate / (1 + e)`.
    pub learning_rate: f64,
    pub momentum: f64,
    pub validation_fraction: f64,
    pub max_epochs: usize,
    pub voted: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            learning_rate: 3.0,
            momentum: 0.7,
            validation_fraction: 0.2,
            max_epochs: 500,
            voted: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Topology {
    Mlp,
    Partitioned { sizes: [usize; 3] },
}

/// Sizes of the three consecutive mass-ordered input partitions.
pub fn partition_sizes(n_features: usize) -> [usize; 3] {
    let p1 = n_features.div_ceil(3);
    let p2 = (n_features - p1).div_ceil(2);
    [p1, p2, n_features - p1 - p2]
}

fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// Single hidden layer sigmoid network. Hidden node `j` only reads inputs in
/// `spans[j]`; weights outside the span are held at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForwardNet<T> {
    n_inputs: usize,
    spans: Vec<(usize, usize)>,
    /// Row-major `n_hidden x (n_inputs + 1)`; the last column is the bias.
    hidden: Vec<T>,
    /// `n_hidden` weights followed by the output bias.
    output: Vec<T>,
}

impl<T: Scalar> FeedForwardNet<T> {
    pub fn zeros(n_inputs: usize, spans: Vec<(usize, usize)>) -> Self {
        let n_hidden = spans.len();
        FeedForwardNet {
            n_inputs,
            spans,
            hidden: vec![T::zero(); n_hidden * (n_inputs + 1)],
            output: vec![T::zero(); n_hidden + 1],
        }
    }

    pub fn fully_connected(n_inputs: usize, n_hidden: usize) -> Self {
        Self::zeros(n_inputs, vec![(0, n_inputs); n_hidden])
    }

    pub fn for_topology(n_inputs: usize, topology: Topology) -> Self {
        match topology {
            Topology::Mlp => Self::fully_connected(n_inputs, MLP_HIDDEN),
            Topology::Partitioned { sizes: [p1, p2, p3] } => {
                let spans = vec![(0, p1), (0, p1 + p2), (p1, p1 + p2 + p3), (p1 + p2, p1 + p2 + p3)];
                Self::zeros(n_inputs, spans)
            }
        }
    }

    pub fn randomize<R: Rng>(&mut self, rng: &mut R) {
        let stride = self.n_inputs + 1;
        for j in 0..self.n_hidden() {
            for i in 0..stride {
                if self.is_connected(j, i) {
                    self.hidden[j * stride + i] = T::of(rng.random_range(-INIT_RANGE..=INIT_RANGE));
                }
            }
        }
        for w in &mut self.output {
            *w = T::of(rng.random_range(-INIT_RANGE..=INIT_RANGE));
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_hidden(&self) -> usize {
        self.spans.len()
    }

    /// Whether hidden node `j` has a live weight on input `i` (`i == n_inputs` is the bias).
    pub fn is_connected(&self, j: usize, i: usize) -> bool {
        let (lo, hi) = self.spans[j];
        i == self.n_inputs || (lo..hi).contains(&i)
    }

    pub fn hidden_weight(&self, j: usize, i: usize) -> T {
        self.hidden[j * (self.n_inputs + 1) + i]
    }

    pub fn n_params(&self) -> usize {
        self.hidden.len() + self.output.len()
    }

    pub fn params(&self) -> Vec<T> {
        self.hidden.iter().chain(&self.output).copied().collect()
    }

    pub fn set_params(&mut self, params: &[T]) {
        let (h, o) = params.split_at(self.hidden.len());
        self.hidden.copy_from_slice(h);
        self.output.copy_from_slice(o);
    }

    fn hidden_activations(&self, x: &[T], out: &mut [T]) {
        let stride = self.n_inputs + 1;
        for (j, &(lo, hi)) in self.spans.iter().enumerate() {
            let w = &self.hidden[j * stride..(j + 1) * stride];
            let mut z = w[self.n_inputs];
            for i in lo..hi {
                z += w[i] * x[i];
            }
            out[j] = sigmoid(z);
        }
    }

    fn output_from(&self, h: &[T]) -> T {
        let n = h.len();
        let mut z = self.output[n];
        for j in 0..n {
            z += self.output[j] * h[j];
        }
        sigmoid(z)
    }

    pub fn forward(&self, x: &[T]) -> T {
        let mut h = vec![T::zero(); self.n_hidden()];
        self.hidden_activations(x, &mut h);
        self.output_from(&h)
    }

    /// Adds the gradient of `0.5 * (t - o)^2` to `grad` (parameter order) and returns the loss.
    pub fn accumulate_gradient(&self, x: &[T], t: T, grad: &mut [T]) -> T {
        let n_hidden = self.n_hidden();
        let stride = self.n_inputs + 1;
        let mut h = vec![T::zero(); n_hidden];
        self.hidden_activations(x, &mut h);
        let o = self.output_from(&h);
        let err = o - t;
        let delta_o = err * o * (T::one() - o);
        let (gh, go) = grad.split_at_mut(self.hidden.len());
        for j in 0..n_hidden {
            go[j] += delta_o * h[j];
            let delta_h = delta_o * self.output[j] * h[j] * (T::one() - h[j]);
            let row = &mut gh[j * stride..(j + 1) * stride];
            let (lo, hi) = self.spans[j];
            for i in lo..hi {
                row[i] += delta_h * x[i];
            }
            row[self.n_inputs] += delta_h;
        }
        go[n_hidden] += delta_o;
        err * err / T::of(2.0)
    }

    pub fn loss_and_gradient(&self, x: &[T], t: T) -> (T, Vec<T>) {
        let mut grad = vec![T::zero(); self.n_params()];
        let loss = self.accumulate_gradient(x, t, &mut grad);
        (loss, grad)
    }

    fn step(&mut self, delta: &[T]) {
        let (dh, dout) = delta.split_at(self.hidden.len());
        for (w, d) in self.hidden.iter_mut().zip(dh) {
            *w += *d;
        }
        for (w, d) in self.output.iter_mut().zip(dout) {
            *w += *d;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<T> {
    /// Number of training rows this snapshot classified correctly.
    pub votes: u64,
    pub net: FeedForwardNet<T>,
}

/// Trained network plus the input scaling learned from the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetModel<T> {
    pub topology: Topology,
    pub config: NetConfig,
    pub seed: u64,
    /// Per-column multiplier mapping training values into [-1, 1].
    pub scale: Vec<T>,
    pub net: FeedForwardNet<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub epochs: usize,
}

pub type MlpModel<T> = NetModel<T>;
pub type PartitionedNetModel<T> = NetModel<T>;

impl<T: Scalar> NetModel<T> {
    fn scaled(&self, row: &[T]) -> Vec<T> {
        row.iter().zip(&self.scale).map(|(v, s)| *v * *s).collect()
    }

    pub fn score(&self, row: &[T]) -> T {
        let x = self.scaled(row);
        let total: u64 = self.snapshots.iter().map(|s| s.votes).sum();
        if !self.config.voted || total == 0 {
            return self.net.forward(&x);
        }
        let mut acc = T::zero();
        for s in &self.snapshots {
            acc += T::of(s.votes as f64) * s.net.forward(&x);
        }
        acc / T::of(total as f64)
    }
}

fn max_abs_scale<T: Scalar>(x: &DenseMatrix<T>) -> Vec<T> {
    let mut max = vec![T::zero(); x.cols()];
    for r in 0..x.rows() {
        for (m, v) in max.iter_mut().zip(x.row(r)) {
            *m = m.max(v.abs());
        }
    }
    max.into_iter()
        .map(|m| if m > T::zero() { T::one() / m } else { T::one() })
        .collect()
}

fn validation_split(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(mix_seed(seed, 0)));
    let n_val = (fraction * n as f64).round() as usize;
    if n_val == 0 || n_val >= n {
        return (idx.clone(), idx);
    }
    let val = idx.split_off(n - n_val);
    (idx, val)
}

pub fn train_mlp<T: Scalar>(
    x: &DenseMatrix<T>,
    y: &[Label],
    config: &NetConfig,
    seed: u64,
) -> Result<MlpModel<T>, ClassifierError> {
    train_net(x, y, Topology::Mlp, config, seed)
}

pub fn train_partitioned_net<T: Scalar>(
    x: &DenseMatrix<T>,
    y: &[Label],
    config: &NetConfig,
    seed: u64,
) -> Result<PartitionedNetModel<T>, ClassifierError> {
    if x.cols() < 3 {
        return Err(ClassifierError::TooFewColumns {
            found: x.cols(),
            required: 3,
        });
    }
    let sizes = partition_sizes(x.cols());
    train_net(x, y, Topology::Partitioned { sizes }, config, seed)
}

fn train_net<T: Scalar>(
    x: &DenseMatrix<T>,
    y: &[Label],
    topology: Topology,
    config: &NetConfig,
    seed: u64,
) -> Result<NetModel<T>, ClassifierError> {
    check_training_data(x, y)?;
    if !(config.learning_rate > 0.0) || !(0.0..1.0).contains(&config.momentum) {
        return Err(ClassifierError::InvalidConfig(
            "learning rate must be positive and momentum in [0, 1)".into(),
        ));
    }
    if !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(ClassifierError::InvalidConfig(
            "validation fraction must be in [0, 1)".into(),
        ));
    }
    let scale = max_abs_scale(x);
    let rows: Vec<Vec<T>> = (0..x.rows())
        .map(|r| x.row(r).iter().zip(&scale).map(|(v, s)| *v * *s).collect())
        .collect();
    let targets: Vec<T> = y.iter().map(|l| l.target()).collect();
    let (train, val) = validation_split(x.rows(), config.validation_fraction, seed);

    let mut net = FeedForwardNet::for_topology(x.cols(), topology);
    net.randomize(&mut seeded(mix_seed(seed, 1)));
    let mut order_rng = seeded(mix_seed(seed, 2));

    let val_error = |net: &FeedForwardNet<T>| -> T {
        let sum: T = val
            .iter()
            .map(|&i| {
                let d = net.forward(&rows[i]) - targets[i];
                d * d
            })
            .sum();
        sum / T::of_usize(val.len())
    };
    let half = T::of(0.5);
    let votes = |net: &FeedForwardNet<T>| -> u64 {
        train
            .iter()
            .filter(|&&i| (net.forward(&rows[i]) >= half) == y[i].is_positive())
            .count() as u64
    };

    let mut order = train.clone();
    let mut best = net.clone();
    // the untrained net is not a candidate; the first epoch always counts
    let mut best_error = T::infinity();
    let mut snapshots = Vec::new();
    let mut velocity = vec![T::zero(); net.n_params()];
    let mut grad = vec![T::zero(); net.n_params()];
    let momentum = T::of(config.momentum);
    let mut epochs = 0;
    for epoch in 0..config.max_epochs {
        let eta = T::of(config.learning_rate / (1.0 + epoch as f64));
        order.shuffle(&mut order_rng);
        for &i in &order {
            grad.iter_mut().for_each(|g| *g = T::zero());
            let loss = net.accumulate_gradient(&rows[i], targets[i], &mut grad);
            if !loss.is_finite() {
                return Err(ClassifierError::Diverged { epoch });
            }
            for (v, g) in velocity.iter_mut().zip(&grad) {
                *v = momentum * *v - eta * *g;
            }
            net.step(&velocity);
        }
        epochs = epoch + 1;
        let error = val_error(&net);
        if !error.is_finite() {
            return Err(ClassifierError::Diverged { epoch });
        }
        if error >= best_error {
            break;
        }
        best_error = error;
        best = net.clone();
        if config.voted {
            snapshots.push(Snapshot {
                votes: votes(&net),
                net: net.clone(),
            });
        }
    }
    Ok(NetModel {
        topology,
        config: *config,
        seed,
        scale,
        net: best,
        snapshots,
        epochs,
    })
}
