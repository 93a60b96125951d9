//! Stage operations. Each is a pure function of its inputs and seed; the
//! instance `i` of a stage always draws from `derive(seed, [i])`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use epitrace::epidemic::{generate_reported, random_source, simulate_si, EpidemicNetwork, GeneratorSpec, SiConfig};
use epitrace::gnn::{self, fit_target, train, GnnConfig, GnnEstimator, GnnModel, TrainConfig, TrainReport};
use epitrace::io::{Dataset, DatasetItem, Split};
use epitrace::likelihood::{score_support, EstimatorKind, LikelihoodConfig, LikelihoodEstimator, SourceScores, DEFAULT_CAP};
use epitrace::metrics::{self, EvalReport};
use epitrace::rng::{self, stream};
use epitrace::trace::{run_trace, TraceConfig, TraceRun};
use epitrace::{Error, Graph, NodeId, Result, Support};

/// Where each trace starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexCase {
    /// A uniformly random infected node.
    #[default]
    Random,
    /// The true source.
    Source,
}

/// Which graph of an outbreak is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportKind {
    /// The fully traced epidemic network.
    #[default]
    Full,
    /// Contacts limited to who-infected-whom.
    InfectionTree,
}

impl SupportKind {
    pub fn support(self, e: &EpidemicNetwork) -> Support {
        match self {
            SupportKind::Full => Support::full(e),
            SupportKind::InfectionTree => Support::full(&e.on_infection_tree()),
        }
    }
}

pub fn instance_seed(seed: u64, i: usize) -> u64 {
    rng::derive(seed, &[i as u64])
}

pub fn generate_graphs(spec: &GeneratorSpec, count: usize, seed: u64) -> Result<Vec<Graph>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let s = GeneratorSpec {
                seed: instance_seed(seed, i),
                ..spec.clone()
            };
            generate_reported(&s).map(|(g, _)| g)
        })
        .collect()
}

pub fn spread(graphs: &[Graph], si: &SiConfig, seed: u64) -> Result<Vec<EpidemicNetwork>> {
    graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let s = instance_seed(seed, i);
            let source = random_source(g, s)?;
            let cfg = SiConfig { seed: s, ..*si };
            simulate_si(Arc::new(g.clone()), source, &cfg)
        })
        .collect()
}

/// A likelihood estimator or a trained model.
#[derive(Debug, Clone)]
pub enum Scorer {
    Likelihood {
        kind: EstimatorKind,
        config: LikelihoodConfig,
        cap: usize,
    },
    Gnn {
        model: GnnModel<f64>,
        config: LikelihoodConfig,
    },
}

impl Scorer {
    pub fn likelihood(kind: EstimatorKind, config: LikelihoodConfig) -> Self {
        Scorer::Likelihood {
            kind,
            config,
            cap: DEFAULT_CAP,
        }
    }

    pub fn score(&self, support: &Support, seed: u64) -> Result<SourceScores<f64>> {
        match self {
            Scorer::Likelihood { kind, config, cap } => score_support(support, kind, config, seed, *cap),
            Scorer::Gnn { model, config } => gnn::score_table(model, support, *config),
        }
    }
}

pub fn trace(
    epidemics: &[EpidemicNetwork],
    cfg: &TraceConfig,
    scorer: &Scorer,
    index: IndexCase,
    seed: u64,
) -> Result<Vec<TraceRun>> {
    epidemics
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let s = instance_seed(seed, i);
            let start = match index {
                IndexCase::Source => e.source(),
                IndexCase::Random => {
                    let mut r = rng::rng(s, &[stream::INDEX_CASE]);
                    e.infected()[rand::Rng::gen_range(&mut r, 0..e.len())]
                }
            };
            match scorer {
                Scorer::Likelihood { kind, config, cap } => {
                    let mut est = LikelihoodEstimator {
                        kind: *kind,
                        config: *config,
                        seed: s,
                        cap: *cap,
                    };
                    run_trace(e, start, cfg, &mut est)
                }
                Scorer::Gnn { model, .. } => {
                    let mut est = GnnEstimator { model: model.clone() };
                    run_trace(e, start, cfg, &mut est)
                }
            }
        })
        .collect()
}

pub fn estimate(
    epidemics: &[EpidemicNetwork],
    kind: SupportKind,
    scorer: &Scorer,
    seed: u64,
) -> Result<Vec<SourceScores<f64>>> {
    epidemics
        .par_iter()
        .enumerate()
        .map(|(i, e)| scorer.score(&kind.support(e), instance_seed(seed, i)))
        .collect()
}

/// Pre-trained and fine-tuned models with their loss curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trained {
    pub pretrained: GnnModel<f64>,
    pub finetuned: GnnModel<f64>,
    pub pretrain_log: TrainReport,
    pub finetune_log: TrainReport,
}

/// Pre-trains on the pretrain split (validating on the validation split),
/// then continues on the finetune split. Targets are standardized by the
/// pretrain labels throughout.
pub fn train_two_phase(data: &Dataset, gnn_cfg: GnnConfig, cfg: &TrainConfig, seed: u64) -> Result<Trained> {
    let mut model = GnnModel::<f64>::new(gnn_cfg, rng::derive(seed, &[stream::INIT]))?;
    let pre = data.graphs(Split::Pretrain);
    let fine = data.graphs(Split::Finetune);
    let val = data.graphs(Split::Validation);
    fit_target(&mut model, &pre)?;
    let phase = |s: u64| TrainConfig {
        seed: rng::derive(seed, &[stream::SHUFFLE, s]),
        ..*cfg
    };
    let pretrain_log = train(&mut model, &pre, &val, &phase(0))?;
    let pretrained = model.clone();
    let finetune_log = train(&mut model, &fine, &val, &phase(1))?;
    Ok(Trained {
        pretrained,
        finetuned: model,
        pretrain_log,
        finetune_log,
    })
}

fn names(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Average error and first detected time of each run against its
/// outbreak's source. An undetected source counts as the run length.
pub fn evaluate_runs(runs: &[TraceRun], epidemics: &[EpidemicNetwork], config: serde_json::Value) -> Result<Vec<EvalReport>> {
    if runs.len() != epidemics.len() {
        return Err(Error::LengthMismatch {
            left: runs.len(),
            right: epidemics.len(),
        });
    }
    let mut err = Vec::with_capacity(runs.len());
    let mut fdt = Vec::with_capacity(runs.len());
    let mut missed = 0usize;
    for (r, e) in runs.iter().zip(epidemics) {
        err.push(metrics::average_error(&r.estimates, e.source(), &e.network())?);
        match metrics::first_detected_time(&r.estimates, e.source()) {
            Some(t) => fdt.push(t as f64),
            None => {
                missed += 1;
                fdt.push(r.stages() as f64);
            }
        }
    }
    let inst = names(runs.len(), "run");
    let a = EvalReport::from_breakdown("average-error", inst.clone(), err, config.clone())?;
    let mut f = EvalReport::from_breakdown("first-detected-time", inst, fdt, config)?;
    f.values.insert("not-detected".into(), missed as f64);
    Ok(vec![a, f])
}

fn topk_report(
    rankings: &[Vec<NodeId>],
    truths: &[NodeId],
    ks: &[usize],
    config: serde_json::Value,
    prefix: &str,
) -> Result<EvalReport> {
    let positions: Vec<f64> = rankings
        .iter()
        .zip(truths)
        .map(|(r, t)| r.iter().position(|v| v == t).map_or(r.len() + 1, |p| p + 1) as f64)
        .collect();
    let mut rep = EvalReport::from_breakdown("truth-rank", names(truths.len(), prefix), positions, config)?;
    for &k in ks {
        rep.values.insert(format!("top{k}"), metrics::topk_accuracy(rankings, truths, k)?);
    }
    Ok(rep)
}

/// Top-k accuracy of score rankings against the true sources.
pub fn evaluate_scores(
    scores: &[SourceScores<f64>],
    epidemics: &[EpidemicNetwork],
    ks: &[usize],
    config: serde_json::Value,
) -> Result<EvalReport> {
    if scores.len() != epidemics.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: epidemics.len(),
        });
    }
    let rankings: Vec<Vec<NodeId>> = scores.iter().map(|s| s.ranking()).collect();
    let truths: Vec<NodeId> = epidemics.iter().map(|e| e.source()).collect();
    topk_report(&rankings, &truths, ks, config, "graph")
}

/// Mean node-wise bias of `scores` against `reference`, per graph.
pub fn evaluate_bias(
    scores: &[SourceScores<f64>],
    reference: &[SourceScores<f64>],
    config: serde_json::Value,
) -> Result<EvalReport> {
    if scores.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: reference.len(),
        });
    }
    let per_graph = scores
        .iter()
        .zip(reference)
        .map(|(a, e)| {
            if a.labels != e.labels {
                return Err(Error::DimensionMismatch("score tables cover different nodes".into()));
            }
            metrics::mean_bias(&a.scores, &e.scores)
        })
        .collect::<Result<Vec<f64>>>()?;
    EvalReport::from_breakdown("bias", names(scores.len(), "graph"), per_graph, config)
}

/// Bias of model outputs against the labels, and top-k accuracy of the
/// model ranking against the label maximizer.
pub fn evaluate_model(
    model: &GnnModel<f64>,
    items: &[DatasetItem],
    ks: &[usize],
    config: serde_json::Value,
) -> Result<Vec<EvalReport>> {
    let mut bias = Vec::with_capacity(items.len());
    let mut rankings = Vec::with_capacity(items.len());
    let mut truths = Vec::with_capacity(items.len());
    for it in items {
        let s = &it.graph.support;
        metrics::check_informative(&it.graph.labels)?;
        let pred = gnn::predict(model, s)?;
        bias.push(metrics::mean_bias(&pred, &it.graph.labels)?);
        rankings.push(
            metrics::rank_indices(&pred)
                .into_iter()
                .map(|i| s.label(NodeId::new(i)))
                .collect::<Vec<_>>(),
        );
        truths.push(s.label(NodeId::new(metrics::rank_indices(&it.graph.labels)[0])));
    }
    let b = EvalReport::from_breakdown("bias-gnn", names(items.len(), "graph"), bias, config.clone())?;
    let t = topk_report(&rankings, &truths, ks, config, "graph")?;
    Ok(vec![b, t])
}
