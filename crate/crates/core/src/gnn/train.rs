//! Per-graph gradient steps over a set of labeled supports.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::node_features;
use super::model::{neighbor_order, GnnModel};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::rng::{self, stream};
use crate::scalar::Scalar;
use crate::support::Support;

/// A support with one target value per local node and a note of where the
/// labels came from (an estimator name, a file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledGraph {
    pub support: Support,
    pub labels: Vec<f64>,
    pub provenance: String,
}

impl LabeledGraph {
    pub fn new(support: Support, labels: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if labels.len() != support.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: support.len(),
            });
        }
        if labels.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                layer: 0,
                what: "label".into(),
            });
        }
        Ok(LabeledGraph {
            support,
            labels,
            provenance: provenance.into(),
        })
    }

    /// Label of the node with the given global label, if present.
    pub fn label_of(&self, node: NodeId) -> Option<f64> {
        self.support.local(node).map(|l| self.labels[l.index()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Optimizer {
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
    Sgd {
        lr: f64,
    },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub optimizer: Optimizer,
    /// Visit graphs in a fresh seeded order each epoch.
    pub shuffle: bool,
    /// Feed LSTM neighbors in a seeded random order instead of by degree.
    pub shuffle_neighbors: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 150,
            optimizer: Optimizer::default(),
            shuffle: false,
            shuffle_neighbors: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let lr = match self.optimizer {
            Optimizer::Adam { lr, beta1, beta2, eps } => {
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || eps <= 0.0 {
                    return Err(Error::InvalidConfig("Adam moments must lie in [0, 1)".into()));
                }
                lr
            }
            Optimizer::Sgd { lr } => lr,
        };
        if !(lr.is_finite() && lr > 0.0) {
            return Err(Error::InvalidConfig(format!("learning rate {lr}")));
        }
        Ok(())
    }
}

/// Mean per-node squared error after each epoch, in label units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

struct Prepared<S> {
    features: Vec<S>,
    targets: Vec<S>,
}

fn prepare<S: Scalar>(set: &[LabeledGraph], shift: f64, scale: f64) -> Result<Vec<Prepared<S>>> {
    set.iter()
        .map(|lg| {
            Ok(Prepared {
                features: node_features::<S>(&lg.support)?,
                targets: lg.labels.iter().map(|&x| S::of((x - shift) / scale)).collect(),
            })
        })
        .collect()
}

/// Mean squared error per node over `set`.
pub fn evaluate_loss<S: Scalar>(model: &GnnModel<S>, set: &[LabeledGraph]) -> Result<f64> {
    let mut total = 0.0;
    let mut nodes = 0usize;
    for lg in set {
        let f = node_features::<S>(&lg.support)?;
        let p = model.predict(lg.support.graph(), &f)?;
        for (x, &l) in p.iter().zip(&lg.labels) {
            total += (x.as_f64() - l).powi(2);
        }
        nodes += lg.labels.len();
    }
    if nodes == 0 {
        return Err(Error::EmptyInstances);
    }
    Ok(total / nodes as f64)
}

/// Trains `model` in place. The loss of one step is `Σ_v (t_v - y_v)^2` on
/// targets standardized by the model's shift and scale, so it is the label
/// space loss divided by `scale^2`.
pub fn train<S: Scalar>(
    model: &mut GnnModel<S>,
    train_set: &[LabeledGraph],
    val_set: &[LabeledGraph],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    model.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyInstances);
    }
    let (shift, scale) = (model.target_shift.as_f64(), model.target_scale.as_f64());
    let data = prepare::<S>(train_set, shift, scale)?;
    let mut shuffler = rng::rng(cfg.seed, &[stream::SHUFFLE]);
    let mut order_rng = rng::rng(cfg.seed, &[stream::SHUFFLE, 1]);
    let n_params = model.params.len();
    let mut m = vec![0.0f64; n_params];
    let mut v = vec![0.0f64; n_params];
    let mut step = 0i32;
    let mut report = TrainReport::default();
    let mut visit: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            visit.shuffle(&mut shuffler);
        }
        let mut epoch_loss = 0.0;
        let mut epoch_nodes = 0usize;
        for &gi in &visit {
            let g = train_set[gi].support.graph();
            let order = neighbor_order(g, cfg.shuffle_neighbors.then_some(&mut order_rng));
            let (loss, grad) = model.affine_loss_and_gradient(
                g,
                &data[gi].features,
                &data[gi].targets,
                &order,
                S::zero(),
                S::one(),
            )?;
            let loss = loss.as_f64();
            if !loss.is_finite() || grad.iter().any(|x| !x.is_finite()) {
                return Err(Error::Diverged { epoch, graph: gi, loss });
            }
            epoch_loss += loss * scale * scale;
            epoch_nodes += g.node_count();
            step += 1;
            match cfg.optimizer {
                Optimizer::Adam { lr, beta1, beta2, eps } => {
                    let c1 = 1.0 - beta1.powi(step);
                    let c2 = 1.0 - beta2.powi(step);
                    for i in 0..n_params {
                        let gr = grad[i].as_f64();
                        m[i] = beta1 * m[i] + (1.0 - beta1) * gr;
                        v[i] = beta2 * v[i] + (1.0 - beta2) * gr * gr;
                        let upd = lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                        model.params[i] -= S::of(upd);
                    }
                }
                Optimizer::Sgd { lr } => {
                    for (p, gr) in model.params.iter_mut().zip(&grad) {
                        *p -= S::of(lr) * *gr;
                    }
                }
            }
            if let Some(i) = model.params.iter().position(|p| !p.is_finite()) {
                return Err(Error::Diverged {
                    epoch,
                    graph: gi,
                    loss: model.params[i].as_f64(),
                });
            }
        }
        report.train_loss.push(epoch_loss / epoch_nodes.max(1) as f64);
        if !val_set.is_empty() {
            report.val_loss.push(evaluate_loss(model, val_set)?);
        }
    }
    Ok(report)
}

/// Standardizes the model's output to the labels of `set`.
pub fn fit_target<S: Scalar>(model: &mut GnnModel<S>, set: &[LabeledGraph]) -> Result<()> {
    let all: Vec<f64> = set.iter().flat_map(|lg| lg.labels.iter().copied()).collect();
    if all.is_empty() {
        return Err(Error::EmptyInstances);
    }
    model.fit_target(&all);
    Ok(())
}
