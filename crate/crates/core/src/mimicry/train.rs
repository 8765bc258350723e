//! Mini-batch Adam loop shared by every trained model.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::diffnet::{AdamConfig, LayerGraph, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.batch == 0 || !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Argument(format!(
                "training needs batch > 0 and a positive learning rate, got batch {} lr {}",
                self.batch, self.lr
            )));
        }
        Ok(())
    }
}

/// One row of `train_log.csv`. Epoch 0 is the untrained initialisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_metric: f64,
    pub seconds: f64,
}

pub const LOG_COLUMNS: [&str; 4] = ["epoch", "train_loss", "val_metric", "seconds"];

pub fn log_to_csv(log: &[EpochLog]) -> String {
    csvio::to_string(log)
}

pub fn log_from_csv(text: &str) -> Result<Vec<EpochLog>> {
    csvio::from_str(text, &LOG_COLUMNS, "training log")
}

/// Validation outcome: the loss drives the learning-signal check, the metric
/// drives model selection.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Validation {
    pub loss: f64,
    pub metric: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Goal {
    Minimize,
    Maximize,
}

impl Goal {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Goal::Minimize => a < b,
            Goal::Maximize => a > b,
        }
    }
}

/// Problem-specific pieces of a training run.
pub(crate) trait Task {
    /// Target payload for a batch (image tensor, class indices, ...).
    type Target;

    fn train_len(&self) -> usize;
    fn batch(&self, indices: &[usize]) -> Result<(Tensor<f32>, Self::Target)>;
    fn loss(&self, output: &Tensor<f32>, target: &Self::Target) -> Result<(f32, Tensor<f32>)>;
    fn validate(&self, graph: &LayerGraph<f32>) -> Result<Validation>;
    fn goal(&self) -> Goal;
}

pub(crate) struct Outcome {
    pub graph: LayerGraph<f32>,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
}

fn diverged(what: &str, epoch: usize, detail: impl std::fmt::Display) -> Error {
    Error::Training(format!("{what} diverged at epoch {epoch}: {detail}"))
}

/// Runs `config.epochs` epochs and returns the parameters of the best
/// validation epoch (epoch 0 included). Fails if the best epoch does not
/// improve the validation loss over initialisation.
pub(crate) fn fit<T: Task>(
    what: &str,
    mut graph: LayerGraph<f32>,
    task: &T,
    config: &TrainConfig,
) -> Result<Outcome> {
    config.validate()?;
    let n = task.train_len();
    if n == 0 {
        return Err(Error::Training(format!("{what}: training split is empty")));
    }
    let adam = AdamConfig::with_lr(config.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();

    let start = Instant::now();
    let v0 = checked_validation(what, 0, task, &graph)?;
    let mut log = vec![EpochLog {
        epoch: 0,
        train_loss: f64::NAN,
        val_metric: v0.metric,
        seconds: start.elapsed().as_secs_f64(),
    }];
    let mut best = (0, v0, graph.clone());

    for epoch in 1..=config.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut total = 0.0f64;
        for chunk in order.chunks(config.batch) {
            total += step(what, epoch, &mut graph, task, chunk, &adam)? * chunk.len() as f64;
        }
        let v = checked_validation(what, epoch, task, &graph)?;
        log.push(EpochLog {
            epoch,
            train_loss: total / n as f64,
            val_metric: v.metric,
            seconds: start.elapsed().as_secs_f64(),
        });
        if task.goal().better(v.metric, best.1.metric) {
            best = (epoch, v, graph.clone());
        }
    }

    let (best_epoch, vb, graph) = best;
    if config.epochs > 0 && !(vb.loss < v0.loss) {
        return Err(Error::Training(format!(
            "{what}: no learning signal, validation loss {:.6} at best epoch {best_epoch} vs {:.6} at initialisation",
            vb.loss, v0.loss
        )));
    }
    Ok(Outcome { graph, log, best_epoch })
}

/// Exactly `iterations` Adam updates on seeded mini-batches, no selection.
pub(crate) fn fit_iterations<T: Task>(
    what: &str,
    mut graph: LayerGraph<f32>,
    task: &T,
    config: &TrainConfig,
    iterations: usize,
) -> Result<LayerGraph<f32>> {
    config.validate()?;
    let n = task.train_len();
    if n == 0 {
        return Err(Error::Training(format!("{what}: training split is empty")));
    }
    let adam = AdamConfig::with_lr(config.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut done = 0;
    let mut epoch = 0;
    while done < iterations {
        epoch += 1;
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch) {
            if done == iterations {
                break;
            }
            step(what, epoch, &mut graph, task, chunk, &adam)?;
            done += 1;
        }
    }
    Ok(graph)
}

fn step<T: Task>(
    what: &str,
    epoch: usize,
    graph: &mut LayerGraph<f32>,
    task: &T,
    chunk: &[usize],
    adam: &AdamConfig,
) -> Result<f64> {
    let (input, target) = task.batch(chunk)?;
    let mut pass = match graph.forward(&input) {
        Ok(p) => p,
        Err(e @ Error::Numeric { .. }) => return Err(diverged(what, epoch, e)),
        Err(e) => return Err(e),
    };
    let (loss, grad) = task.loss(pass.output(), &target)?;
    if !loss.is_finite() {
        return Err(diverged(what, epoch, format!("training loss {loss}")));
    }
    let grads = graph.backward(&pass, &grad)?;
    pass.release();
    graph.adam_step(&grads, adam)?;
    Ok(loss as f64)
}

fn checked_validation<T: Task>(what: &str, epoch: usize, task: &T, graph: &LayerGraph<f32>) -> Result<Validation> {
    let v = match task.validate(graph) {
        Ok(v) => v,
        Err(e @ Error::Numeric { .. }) => return Err(diverged(what, epoch, e)),
        Err(e) => return Err(e),
    };
    if !(v.loss.is_finite() && v.metric.is_finite()) {
        return Err(diverged(
            what,
            epoch,
            format!("validation loss {} metric {}", v.loss, v.metric),
        ));
    }
    Ok(v)
}
