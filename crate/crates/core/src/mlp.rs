//! Three-layer perceptron with backpropagation training.
//!
//! Topology is input → hidden (tan-sigmoid) → output (linear), each
//! non-output layer carrying a constant bias unit prepended to its
//! activations. Weights are stored row-major: `theta1` is
//! `hidden x (inputs+1)`, `theta2` is `outputs x (hidden+1)`.
//!
//! The training cost is squared error, `0.5 * |h - y|^2` per example
//! averaged over the batch, so the output delta is simply `h - y` and the
//! hidden delta is the bias-stripped back-projection scaled by the
//! tan-sigmoid derivative.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::Rng;

/// Tan-sigmoid activation, `-1 + 2 / (1 + exp(-2x))`, range (-1, 1).
#[inline]
pub fn tan_sigmoid(x: f64) -> f64 {
    -1.0 + 2.0 / (1.0 + crate::num::exp(-2.0 * x))
}

/// Derivative of the tan-sigmoid expressed through its output value.
#[inline]
pub fn tan_sigmoid_deriv(a: f64) -> f64 {
    1.0 - a * a
}

/// Three-layer perceptron.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    /// Hidden weights, `n_hidden x (n_in + 1)`, bias column first.
    pub theta1: Vec<f64>,
    /// Output weights, `n_out x (n_hidden + 1)`, bias column first.
    pub theta2: Vec<f64>,
    /// Seed the weights were initialized from.
    pub seed: u64,
}

/// Weight initialization half-range.
const INIT_EPSILON: f64 = 0.12;

impl Mlp {
    /// Uniform random initialization in `[-0.12, 0.12]`, seeded.
    pub fn new(n_in: usize, n_hidden: usize, n_out: usize, seed: u64) -> Self {
        let mut rng = Rng::seed_from(seed);
        let mut init = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| rng.range(-INIT_EPSILON, INIT_EPSILON))
                .collect()
        };
        Self {
            n_in,
            n_hidden,
            n_out,
            theta1: init(n_hidden * (n_in + 1)),
            theta2: init(n_out * (n_hidden + 1)),
            seed,
        }
    }

    pub fn zeroed(n_in: usize, n_hidden: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_hidden,
            n_out,
            theta1: vec![0.0; n_hidden * (n_in + 1)],
            theta2: vec![0.0; n_out * (n_hidden + 1)],
            seed: 0,
        }
    }

    pub fn topology(&self) -> (usize, usize, usize) {
        (self.n_in, self.n_hidden, self.n_out)
    }

    pub fn check_shapes(&self) -> Result<()> {
        if self.theta1.len() != self.n_hidden * (self.n_in + 1)
            || self.theta2.len() != self.n_out * (self.n_hidden + 1)
        {
            return Err(Error::Contract(format!(
                "weight matrices do not match topology ({}, {}, {})",
                self.n_in, self.n_hidden, self.n_out
            )));
        }
        if !self
            .theta1
            .iter()
            .chain(&self.theta2)
            .all(|w| w.is_finite())
        {
            return Err(Error::Contract("non-finite weights".into()));
        }
        Ok(())
    }

    /// Forward pass: returns the hidden activations and the output vector.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.n_in {
            return Err(Error::Contract(format!(
                "input length {} does not match topology input {}",
                x.len(),
                self.n_in
            )));
        }
        let mut a2 = vec![0.0; self.n_hidden];
        let mut h = vec![0.0; self.n_out];
        self.forward_into(x, &mut a2, &mut h);
        Ok((a2, h))
    }

    /// Allocation-free forward pass into caller buffers (training and
    /// streaming inference hot path). Lengths are the caller's contract.
    #[inline]
    pub fn forward_into(&self, x: &[f64], a2: &mut [f64], h: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_in);
        debug_assert_eq!(a2.len(), self.n_hidden);
        debug_assert_eq!(h.len(), self.n_out);
        for j in 0..self.n_hidden {
            let row = &self.theta1[j * (self.n_in + 1)..(j + 1) * (self.n_in + 1)];
            let mut z = row[0];
            for (w, xi) in row[1..].iter().zip(x) {
                z += w * xi;
            }
            a2[j] = tan_sigmoid(z);
        }
        for k in 0..self.n_out {
            let row = &self.theta2[k * (self.n_hidden + 1)..(k + 1) * (self.n_hidden + 1)];
            let mut z = row[0];
            for (w, aj) in row[1..].iter().zip(a2.iter()) {
                z += w * aj;
            }
            h[k] = z; // linear output layer
        }
    }

    /// Squared-error cost of one example, `0.5 * |h - y|^2`.
    pub fn cost(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (_, h) = self.forward(x)?;
        if y.len() != self.n_out {
            return Err(Error::Contract("target length mismatch".into()));
        }
        Ok(0.5 * h.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
    }

    /// Analytic gradients of the squared-error cost for one example.
    ///
    /// Output delta is `h - y`; the hidden delta back-projects through the
    /// output weights with the bias row excluded, scaled by the activation
    /// derivative. Returned gradients have the same layouts as `theta1` /
    /// `theta2`.
    pub fn backprop_gradients(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut g1 = vec![0.0; self.theta1.len()];
        let mut g2 = vec![0.0; self.theta2.len()];
        self.accumulate_gradients(x, y, &mut g1, &mut g2)?;
        Ok((g1, g2))
    }

    /// Add one example's gradients into `g1`/`g2`; returns the example cost.
    pub fn accumulate_gradients(
        &self,
        x: &[f64],
        y: &[f64],
        g1: &mut [f64],
        g2: &mut [f64],
    ) -> Result<f64> {
        if y.len() != self.n_out {
            return Err(Error::Contract(format!(
                "target length {} does not match topology output {}",
                y.len(),
                self.n_out
            )));
        }
        if x.len() != self.n_in {
            return Err(Error::Contract(format!(
                "input length {} does not match topology input {}",
                x.len(),
                self.n_in
            )));
        }
        let mut scratch = Scratch::for_net(self);
        Ok(self.accumulate_gradients_buffered(x, y, g1, g2, &mut scratch))
    }

    fn accumulate_gradients_buffered(
        &self,
        x: &[f64],
        y: &[f64],
        g1: &mut [f64],
        g2: &mut [f64],
        scratch: &mut Scratch,
    ) -> f64 {
        let Scratch { a2, h, delta3 } = scratch;
        self.forward_into(x, a2, h);

        // delta3 = h - y
        let mut cost = 0.0;
        for k in 0..self.n_out {
            let d = h[k] - y[k];
            delta3[k] = d;
            cost += d * d;
        }
        for k in 0..self.n_out {
            let row = &mut g2[k * (self.n_hidden + 1)..(k + 1) * (self.n_hidden + 1)];
            row[0] += delta3[k];
            for j in 0..self.n_hidden {
                row[j + 1] += delta3[k] * a2[j];
            }
        }

        // delta2 = (theta2^T . delta3) * g1'(z), bias row excluded.
        for j in 0..self.n_hidden {
            let mut back = 0.0;
            for k in 0..self.n_out {
                back += self.theta2[k * (self.n_hidden + 1) + j + 1] * delta3[k];
            }
            let d2 = back * tan_sigmoid_deriv(a2[j]);
            let row = &mut g1[j * (self.n_in + 1)..(j + 1) * (self.n_in + 1)];
            row[0] += d2;
            for (gi, xi) in row[1..].iter_mut().zip(x) {
                *gi += d2 * xi;
            }
        }

        0.5 * cost
    }
}

// Reusable per-example buffers for the training loop.
struct Scratch {
    a2: Vec<f64>,
    h: Vec<f64>,
    delta3: Vec<f64>,
}

impl Scratch {
    fn for_net(net: &Mlp) -> Self {
        Self {
            a2: vec![0.0; net.n_hidden],
            h: vec![0.0; net.n_out],
            delta3: vec![0.0; net.n_out],
        }
    }
}

/// Training examples: `m` rows of `n_in` features and `n_out` targets,
/// stored flat row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub m: usize,
    pub n_in: usize,
    pub n_out: usize,
}

impl LabeledDataset {
    pub fn new(n_in: usize, n_out: usize) -> Self {
        Self {
            x: Vec::new(),
            y: Vec::new(),
            m: 0,
            n_in,
            n_out,
        }
    }

    pub fn push(&mut self, x: &[f64], y: &[f64]) {
        debug_assert_eq!(x.len(), self.n_in);
        debug_assert_eq!(y.len(), self.n_out);
        self.x.extend_from_slice(x);
        self.y.extend_from_slice(y);
        self.m += 1;
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_in..(i + 1) * self.n_in]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.y[i * self.n_out..(i + 1) * self.n_out]
    }

    /// Append another dataset of the same shape.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.n_in != self.n_in || other.n_out != self.n_out {
            return Err(Error::Contract(format!(
                "cannot merge ({}, {}) dataset into ({}, {})",
                other.n_in, other.n_out, self.n_in, self.n_out
            )));
        }
        self.x.extend_from_slice(&other.x);
        self.y.extend_from_slice(&other.y);
        self.m += other.m;
        Ok(())
    }

    fn gather(&self, idx: &[usize]) -> Self {
        let mut out = Self::new(self.n_in, self.n_out);
        for &i in idx {
            out.push(self.input(i), self.target(i));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchMode {
    Full,
    Mini(usize),
}

/// Training configuration. Fractions follow the 40/10/50
/// train/validation/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_mode: BatchMode,
    /// Stop after this many epochs without a validation improvement.
    pub early_stop_patience: usize,
    /// (train, validation, test) fractions; must sum to 1.
    pub split_fractions: (f64, f64, f64),
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            max_epochs: 1000,
            batch_mode: BatchMode::Full,
            early_stop_patience: 50,
            split_fractions: (0.40, 0.10, 0.50),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        let (a, b, c) = self.split_fractions;
        if a < 0.0 || b < 0.0 || c < 0.0 || (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions ({a}, {b}, {c}) must be non-negative and sum to 1"
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be >= 1".into()));
        }
        if let BatchMode::Mini(0) = self.batch_mode {
            return Err(Error::Config("mini-batch size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_cost: f64,
    pub val_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_cost: f64,
}

/// Deterministic seeded shuffle and split into train/validation/test of
/// sizes `floor(a*m)`, `floor(b*m)`, remainder.
pub fn split_dataset(
    ds: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    cfg.validate()?;
    if ds.m < 10 {
        return Err(Error::Config(format!(
            "dataset of {} examples is too small to split",
            ds.m
        )));
    }
    let mut idx: Vec<usize> = (0..ds.m).collect();
    let mut rng = Rng::seed_from(cfg.seed);
    rng.shuffle(&mut idx);
    let n_train = (cfg.split_fractions.0 * ds.m as f64) as usize;
    let n_val = (cfg.split_fractions.1 * ds.m as f64) as usize;
    Ok((
        ds.gather(&idx[..n_train]),
        ds.gather(&idx[n_train..n_train + n_val]),
        ds.gather(&idx[n_train + n_val..]),
    ))
}

fn mean_cost(net: &Mlp, ds: &LabeledDataset) -> Result<f64> {
    if ds.m == 0 {
        return Ok(0.0);
    }
    let mut scratch = Scratch::for_net(net);
    let mut sum = 0.0;
    for i in 0..ds.m {
        net.forward_into(ds.input(i), &mut scratch.a2, &mut scratch.h);
        let y = ds.target(i);
        sum += 0.5
            * scratch
                .h
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
    }
    Ok(sum / ds.m as f64)
}

/// Mean squared-error cost of a network over a dataset.
pub fn dataset_cost(net: &Mlp, ds: &LabeledDataset) -> Result<f64> {
    mean_cost(net, ds)
}

/// Gradient-descent training with early stopping on validation cost.
///
/// The dataset is shuffled and split per `cfg`; the returned network
/// carries the weights of the best validation epoch. Deterministic for a
/// fixed seed. A non-finite cost aborts with the history attached.
pub fn train(
    ds: &LabeledDataset,
    topology: (usize, usize, usize),
    cfg: &TrainConfig,
) -> Result<(Mlp, TrainHistory)> {
    cfg.validate()?;
    if ds.n_in != topology.0 || ds.n_out != topology.2 {
        return Err(Error::Contract(format!(
            "dataset ({}, {}) does not match topology ({}, {}, {})",
            ds.n_in, ds.n_out, topology.0, topology.1, topology.2
        )));
    }
    let (train_set, val_set, _) = split_dataset(ds, cfg)?;
    train_on_split(&train_set, &val_set, topology, cfg)
}

/// Training core on an explicit train/validation split.
pub fn train_on_split(
    train_set: &LabeledDataset,
    val_set: &LabeledDataset,
    topology: (usize, usize, usize),
    cfg: &TrainConfig,
) -> Result<(Mlp, TrainHistory)> {
    cfg.validate()?;
    if train_set.m == 0 {
        return Err(Error::Config("empty training split".into()));
    }
    let (n_in, n_hidden, n_out) = topology;
    let mut net = Mlp::new(n_in, n_hidden, n_out, cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut rng = Rng::seed_from(cfg.seed.wrapping_add(1));

    let mut history = TrainHistory::default();
    let mut best = net.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut since_best = 0usize;

    let mut order: Vec<usize> = (0..train_set.m).collect();
    let mut g1 = vec![0.0; net.theta1.len()];
    let mut g2 = vec![0.0; net.theta2.len()];
    let mut scratch = Scratch::for_net(&net);

    for epoch in 0..cfg.max_epochs {
        let batch = match cfg.batch_mode {
            BatchMode::Full => train_set.m,
            BatchMode::Mini(b) => b.min(train_set.m),
        };
        if matches!(cfg.batch_mode, BatchMode::Mini(_)) {
            rng.shuffle(&mut order);
        }

        let mut start = 0;
        while start < train_set.m {
            let end = (start + batch).min(train_set.m);
            g1.fill(0.0);
            g2.fill(0.0);
            for &i in &order[start..end] {
                net.accumulate_gradients_buffered(
                    train_set.input(i),
                    train_set.target(i),
                    &mut g1,
                    &mut g2,
                    &mut scratch,
                );
            }
            let scale = cfg.learning_rate / (end - start) as f64;
            for (w, g) in net.theta1.iter_mut().zip(&g1) {
                *w -= scale * g;
            }
            for (w, g) in net.theta2.iter_mut().zip(&g2) {
                *w -= scale * g;
            }
            start = end;
        }

        let train_cost = mean_cost(&net, train_set)?;
        let val_cost = mean_cost(&net, val_set)?;
        history.epochs.push(EpochStats {
            epoch,
            train_cost,
            val_cost,
        });
        if !train_cost.is_finite() || !val_cost.is_finite() {
            return Err(Error::TrainingDiverged { epoch, history });
        }

        let monitored = if val_set.m > 0 { val_cost } else { train_cost };
        if monitored < best_val {
            best_val = monitored;
            best = net.clone();
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > cfg.early_stop_patience {
                break;
            }
        }
    }

    history.best_epoch = best_epoch;
    history.best_val_cost = best_val;
    Ok((best, history))
}
