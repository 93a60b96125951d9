//! Graph neural network that learns per-node source scores.

mod features;
mod model;
mod train;

pub use features::{boundary_distance_ratio, degree_ratio, infected_proportion, node_features, INPUT_DIM};
pub use model::{loss, neighbor_order, Aggregator, GnnConfig, GnnModel};
pub use train::{evaluate_loss, fit_target, train, LabeledGraph, Optimizer, TrainConfig, TrainReport};

use crate::error::Result;
use crate::graph::NodeId;
use crate::likelihood::{EstimatorKind, LikelihoodConfig, ScoreSnapshot, SourceScores, DEFAULT_CAP};
use crate::scalar::{argmax_set, Scalar};
use crate::support::Support;
use crate::trace::SourceEstimator;

/// Predicted score of every node of `support`, by local id.
pub fn predict<S: Scalar>(model: &GnnModel<S>, support: &Support) -> Result<Vec<S>> {
    let f = node_features::<S>(support)?;
    model.predict(support.graph(), &f)
}

/// The `k` highest-scoring nodes (global labels, best first, ties by id),
/// with `k` clamped to the support size.
pub fn predict_topk<S: Scalar>(model: &GnnModel<S>, support: &Support, k: usize) -> Result<(Vec<NodeId>, usize)> {
    let scores = predict(model, support)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(support.label(NodeId::new(a)).cmp(&support.label(NodeId::new(b))))
    });
    let k = k.min(idx.len());
    Ok((idx[..k].iter().map(|&i| support.label(NodeId::new(i))).collect(), k))
}

/// The nodes sharing the top predicted score.
pub fn predict_sources<S: Scalar>(model: &GnnModel<S>, support: &Support) -> Result<Vec<NodeId>> {
    let scores = predict(model, support)?;
    Ok(argmax_set(&scores)
        .into_iter()
        .map(|i| support.label(NodeId::new(i)))
        .collect())
}

/// Predictions as a score table; `likelihood` records the universe the
/// model's labels were computed under.
pub fn score_table<S: Scalar>(
    model: &GnnModel<S>,
    support: &Support,
    likelihood: LikelihoodConfig,
) -> Result<SourceScores<S>> {
    let snapshot = ScoreSnapshot {
        estimator: EstimatorKind::Gnn,
        likelihood,
        seed: model.init_seed,
        cap: DEFAULT_CAP,
        approximate_count: false,
        sampled: false,
    };
    SourceScores::new(support.sub.labels.clone(), predict(model, support)?, snapshot)
}

/// A trained model plugged into contact tracing.
#[derive(Debug, Clone)]
pub struct GnnEstimator<S> {
    pub model: GnnModel<S>,
}

impl<S: Scalar> SourceEstimator for GnnEstimator<S> {
    fn name(&self) -> String {
        "gnn".into()
    }

    fn score(&mut self, support: &Support) -> Result<Vec<f64>> {
        Ok(predict(&self.model, support)?.into_iter().map(S::as_f64).collect())
    }
}
