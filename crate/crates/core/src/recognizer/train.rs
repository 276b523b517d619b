use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mlp::{batch_gradients, Gradients, MlpModel};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub lr0: f64,
    pub lr_decay: f64,
    pub decay_every: usize,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Train : validation : test proportions.
    pub split: [u32; 3],
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: vec![64, 64],
            batch_size: 16,
            lr0: 1e-3,
            lr_decay: 0.9,
            decay_every: 4,
            epochs: 200,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            split: [3, 1, 1],
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.batch_size == 0 || self.epochs == 0 || self.decay_every == 0 {
            return bad("batch_size, epochs and decay_every must be positive");
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return bad("hidden layer widths must be positive");
        }
        if !(self.lr0 > 0.0) || !(self.lr_decay > 0.0) || !(self.adam_eps > 0.0) {
            return bad("lr0, lr_decay and adam_eps must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.split[0] == 0 || self.split.iter().sum::<u32>() == 0 {
            return bad("split must give the training set a positive share");
        }
        Ok(())
    }

    /// Step size for a zero-based epoch.
    pub fn lr(&self, epoch: usize) -> f64 {
        self.lr0 * self.lr_decay.powi((epoch / self.decay_every) as i32)
    }

    pub fn layer_sizes(&self, input_dim: usize) -> Vec<usize> {
        let mut v = vec![input_dim];
        v.extend(&self.hidden);
        v.push(1);
        v
    }
}

/// Feature rows with scalar targets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Samples {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) {
        self.x.push(x);
        self.y.push(y);
    }

    pub fn extend(&mut self, other: Samples) {
        self.x.extend(other.x);
        self.y.extend(other.y);
    }

    /// Per-column mean and standard deviation; a zero deviation becomes 1.
    pub fn standardization(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.x.first().map_or(0, Vec::len);
        let n = self.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for x in &self.x {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for x in &self.x {
            for i in 0..d {
                var[i] += (x[i] - mean[i]).powi(2);
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt()).map(|s| if s > 0.0 { s } else { 1.0 }).collect();
        (mean, std)
    }

    fn standardized(&self, mean: &[f64], std: &[f64]) -> Vec<Vec<f64>> {
        self.x
            .iter()
            .map(|x| x.iter().zip(mean.iter().zip(std)).map(|(v, (m, s))| (v - m) / s).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Best-validation model, taking raw (unstandardized) features.
    pub model: MlpModel,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(model: &mut MlpModel) -> Self {
        let zeros: Vec<Vec<f64>> = model.tensors_mut().iter().map(|t| vec![0.0; t.len()]).collect();
        Adam { m: zeros.clone(), v: zeros, t: 0 }
    }

    fn step(&mut self, model: &mut MlpModel, g: &Gradients, lr: f64, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let grads = g.tensors();
        for (((p, gt), m), v) in model.tensors_mut().into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for (((p, &gi), m), v) in p.iter_mut().zip(gt).zip(m.iter_mut()).zip(v.iter_mut()) {
                // Moments of parameters with long-zero gradients decay into
                // subnormals, which are very slow to compute with; flush them.
                *m = flush(cfg.beta1 * *m + (1.0 - cfg.beta1) * gi);
                *v = flush(cfg.beta2 * *v + (1.0 - cfg.beta2) * gi * gi);
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + cfg.adam_eps);
            }
        }
    }
}

fn flush(x: f64) -> f64 {
    if x.abs() < 1e-150 {
        0.0
    } else {
        x
    }
}

/// Mini-batch Adam on the MSE loss with inputs standardized from the training
/// set. The validation set selects the retained model; when it is empty the
/// training loss does.
pub fn train(train_set: &Samples, val_set: &Samples, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let dim = train_set.x[0].len();
    if let Some(bad) = train_set.x.iter().chain(&val_set.x).find(|x| x.len() != dim) {
        return Err(Error::Dimension { expected: dim, got: bad.len() });
    }
    let (mean, std) = train_set.standardization();
    let xs = train_set.standardized(&mean, &std);
    let val_xs = val_set.standardized(&mean, &std);

    let mut model = MlpModel::init(&cfg.layer_sizes(dim), seed::derive(cfg.seed, &[0x1417]))?;
    let mut adam = Adam::new(&mut model);
    let mut grads = Gradients::zeros_like(&model);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut bx: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);
    let mut by: Vec<f64> = Vec::with_capacity(cfg.batch_size);

    let mut log = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, 0, model.clone());
    for epoch in 0..cfg.epochs {
        let lr = cfg.lr(epoch);
        order.shuffle(&mut seed::rng(cfg.seed, &[0x5F1, epoch as u64]));
        let mut sse = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            bx.clear();
            by.clear();
            for &i in chunk {
                bx.push(&xs[i]);
                by.push(train_set.y[i]);
            }
            sse += batch_gradients(&model, &bx, &by, &mut grads)? * chunk.len() as f64;
            adam.step(&mut model, &grads, lr, cfg);
        }
        let train_mse = sse / train_set.len() as f64;
        let val_mse = if val_set.is_empty() { f64::NAN } else { model.mse(&val_xs, &val_set.y)? };
        let score = if val_set.is_empty() { model.mse(&xs, &train_set.y)? } else { val_mse };
        if score < best.0 {
            best = (score, epoch, model.clone());
        }
        log::debug!("epoch {epoch} lr {lr:.3e} train {train_mse:.5} val {val_mse:.5}");
        log.push(EpochLog { epoch, lr, train_mse, val_mse });
    }
    let (_, best_epoch, mut model) = best;
    model.fold_standardization(&mean, &std);
    Ok(TrainOutcome { model, log, best_epoch })
}

pub fn training_log_csv(log: &[EpochLog]) -> String {
    let mut s = String::from("epoch,lr,train_mse,val_mse\n");
    for e in log {
        let _ = writeln!(s, "{},{:e},{:e},{:e}", e.epoch, e.lr, e.train_mse, e.val_mse);
    }
    s
}

pub fn write_training_log(log: &[EpochLog], path: &Path) -> Result<()> {
    std::fs::write(path, training_log_csv(log)).map_err(|e| Error::io(path, e))
}
