//! Permitted permutations, their probabilities, and source likelihoods.
//!
//! A permitted permutation σ = (v, v_2, ..., v_n) of a connected support is
//! an order in which every node touches an earlier one. Under SI spreading
//! the next node is drawn along a uniform boundary edge, giving
//!
//! ```text
//! P(σ|v) = ∏_{i=2..n} Φ_i / B_{i-1}
//! ```
//!
//! where Φ_i counts the earlier neighbors of v_i and B_{i-1} is the number of
//! boundary edges leaving {v_1..v_{i-1}} in the degree universe. Literal mode
//! uses `Σ_{j<i} d(v_j) - 2(i - Φ_{i-1} - 1)` for the denominator instead;
//! both agree on trees. All values are natural logs.

mod approx;
mod count;
mod exact;
mod perm;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{max_component_after_removal, NodeId};
use crate::rng::{self, stream};
use crate::scalar::{argmax_set, Scalar};
use crate::support::Support;
use crate::trace::SourceEstimator;

pub use approx::{
    extreme_log_probability, log_counts, random_bfs_permutation, sample_permutation,
    sampled_log_average, Extreme, PermutationSampler, SamplingRule,
};
pub use count::{count_permutations_tree, tree_counts_exact, tree_log_counts};
pub use exact::{
    constant_tree_log_probability, count_permutations, exact_log_likelihood, DEFAULT_CAP,
};
pub use perm::{
    enumerate_permitted, permutation_log_probability, permutation_probability_exact, Permutation,
};

/// Where the degrees d(v) in the permutation probability are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeUniverse {
    /// The support graph itself.
    TracingNetwork,
    /// All observed contacts, including uninfected ones.
    #[default]
    ObservedContacts,
    /// The epidemic network G_N.
    EpidemicNetwork,
    /// Every node has degree `d`.
    Constant(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ProbabilityMode {
    #[serde(rename = "literal")]
    Literal,
    #[default]
    #[serde(rename = "exact-boundary")]
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LikelihoodConfig {
    pub universe: DegreeUniverse,
    pub mode: ProbabilityMode,
}

impl LikelihoodConfig {
    pub fn new(universe: DegreeUniverse, mode: ProbabilityMode) -> Self {
        LikelihoodConfig { universe, mode }
    }

    /// Per-node degrees of the support in this universe.
    pub fn degrees(&self, support: &Support) -> Result<Vec<u32>> {
        let g = support.graph();
        let tracing = g.degrees();
        let out = match self.universe {
            DegreeUniverse::TracingNetwork => tracing.clone(),
            DegreeUniverse::ObservedContacts => support.observed_degree.clone(),
            DegreeUniverse::EpidemicNetwork => support.epidemic_degree.clone(),
            DegreeUniverse::Constant(d) => {
                let max = tracing.iter().copied().max().unwrap_or(0);
                if d < max {
                    return Err(Error::ConstantDegreeTooSmall { degree: d, max });
                }
                vec![d; g.node_count()]
            }
        };
        if out.len() != tracing.len() {
            return Err(Error::LengthMismatch {
                left: out.len(),
                right: tracing.len(),
            });
        }
        if let Some(v) = (0..out.len()).find(|&i| out[i] < tracing[i]) {
            return Err(Error::InvalidConfig(format!(
                "universe degree of local node {v} is below its support degree"
            )));
        }
        Ok(out)
    }
}

/// A source estimator over a support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// `ln Σ_σ P(σ|v)` exactly.
    Exact,
    /// `ln |Ω(v)|`.
    RumorCentrality,
    /// Minus the largest component left after deleting `v` (trees only).
    Centroid,
    /// Sampled average probability times `|Ω(v)|`.
    Rsavr {
        samples: usize,
        #[serde(default)]
        rule: SamplingRule,
    },
    /// One random-BFS permutation's probability times `|Ω(v)|`.
    Bfsran,
    DegMax {
        samples: usize,
    },
    DegMin {
        samples: usize,
    },
    DegRan,
    /// Predictions of a trained network (see `gnn::score_table`); not
    /// computable by [`score_support`].
    Gnn,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Exact => "exact",
            EstimatorKind::RumorCentrality => "rumor-centrality",
            EstimatorKind::Centroid => "centroid",
            EstimatorKind::Rsavr { .. } => "rsavr",
            EstimatorKind::Bfsran => "bfsran",
            EstimatorKind::DegMax { .. } => "degmax",
            EstimatorKind::DegMin { .. } => "degmin",
            EstimatorKind::DegRan => "degran",
            EstimatorKind::Gnn => "gnn",
        }
    }
}

/// Everything needed to regenerate a score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSnapshot {
    pub estimator: EstimatorKind,
    pub likelihood: LikelihoodConfig,
    pub seed: u64,
    pub cap: usize,
    /// `|Ω|` was counted on spanning trees (support is not a tree).
    pub approximate_count: bool,
    /// An extreme estimator fell back to sampling for some node.
    pub sampled: bool,
}

/// Per-node log-domain scores over a support, indexed by local id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SourceScores<S> {
    pub labels: Vec<NodeId>,
    pub scores: Vec<S>,
    pub snapshot: ScoreSnapshot,
    /// Labels of the maximal scores (relative tolerance 1e-9), ascending.
    pub argmax: Vec<NodeId>,
}

impl<S: Scalar> SourceScores<S> {
    pub fn new(labels: Vec<NodeId>, scores: Vec<S>, snapshot: ScoreSnapshot) -> Result<Self> {
        if labels.len() != scores.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: scores.len(),
            });
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite {
                layer: 0,
                what: format!("score of node {}", labels[i]),
            });
        }
        let argmax = argmax_set(&scores).into_iter().map(|i| labels[i]).collect();
        Ok(SourceScores {
            labels,
            scores,
            snapshot,
            argmax,
        })
    }

    pub fn score_of(&self, label: NodeId) -> Option<S> {
        self.labels
            .binary_search(&label)
            .ok()
            .map(|i| self.scores[i])
    }

    /// Labels ordered by descending score, ties by ascending id.
    pub fn ranking(&self) -> Vec<NodeId> {
        let mut idx: Vec<usize> = (0..self.labels.len()).collect();
        idx.sort_by(|&a, &b| {
            self.scores[b]
                .partial_cmp(&self.scores[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(self.labels[a].cmp(&self.labels[b]))
        });
        idx.into_iter().map(|i| self.labels[i]).collect()
    }
}

/// Scores every node of `support`. Node `v` draws from its own substream
/// `(seed, SAMPLE, label(v))`, so results do not depend on scheduling.
pub fn score_support<S: Scalar>(
    support: &Support,
    kind: &EstimatorKind,
    cfg: &LikelihoodConfig,
    seed: u64,
    cap: usize,
) -> Result<SourceScores<S>> {
    let g = support.graph();
    if let EstimatorKind::Gnn = kind {
        return Err(Error::InvalidConfig(
            "network scores need a trained model".into(),
        ));
    }
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let degrees = cfg.degrees(support)?;
    let needs_counts = !matches!(kind, EstimatorKind::Exact | EstimatorKind::Centroid);
    let (counts, approximate_count) = if needs_counts {
        log_counts::<S>(g)?
    } else {
        (Vec::new(), false)
    };
    let nodes: Vec<NodeId> = g.nodes().collect();
    let per_node = |v: NodeId| -> Result<(S, bool)> {
        let mut r = rng::rng(seed, &[stream::SAMPLE, support.label(v).0 as u64]);
        let count = || counts[v.index()];
        Ok(match *kind {
            EstimatorKind::Exact => (exact_log_likelihood(support, v, cfg, cap)?, false),
            EstimatorKind::RumorCentrality => (count(), false),
            EstimatorKind::Centroid | EstimatorKind::Gnn => unreachable!("handled above"),
            EstimatorKind::Rsavr { samples, rule } => {
                let avg =
                    sampled_log_average::<S>(g, v, &degrees, cfg.mode, samples, rule, &mut r)?;
                (avg + count(), false)
            }
            EstimatorKind::Bfsran => {
                let p = random_bfs_permutation(g, v, &mut r)?;
                let lp: S = perm_log_probability(&p, support, &degrees, cfg)?;
                (lp + count(), false)
            }
            EstimatorKind::DegMax { samples } | EstimatorKind::DegMin { samples } => {
                let which = if matches!(kind, EstimatorKind::DegMax { .. }) {
                    Extreme::Max
                } else {
                    Extreme::Min
                };
                let (x, sampled) = extreme_log_probability::<S>(
                    g,
                    v,
                    &degrees,
                    cfg.mode,
                    which,
                    samples,
                    cap,
                    SamplingRule::default(),
                    &mut r,
                )?;
                (x + count(), sampled)
            }
            EstimatorKind::DegRan => {
                // a uniformly random element of Ω(v)
                let uniform = if approximate_count {
                    enumerate_permitted(g, v, cap)
                        .map(|all| all[r.gen_range(0..all.len())].clone())
                        .or_else(|_| sample_permutation(g, v, SamplingRule::UniformTree, &mut r))?
                } else {
                    sample_permutation(g, v, SamplingRule::UniformTree, &mut r)?
                };
                let lp: S = perm_log_probability(&uniform, support, &degrees, cfg)?;
                (lp + count(), false)
            }
        })
    };
    let (scores, sampled) = if let EstimatorKind::Centroid = kind {
        let worst = max_component_after_removal(g)?;
        (worst.iter().map(|&w| -S::of_usize(w)).collect(), false)
    } else {
        let results: Vec<(S, bool)> = nodes
            .par_iter()
            .map(|&v| per_node(v))
            .collect::<Result<_>>()?;
        let sampled = results.iter().any(|r| r.1);
        (results.into_iter().map(|r| r.0).collect(), sampled)
    };
    SourceScores::new(
        support.sub.labels.clone(),
        scores,
        ScoreSnapshot {
            estimator: *kind,
            likelihood: *cfg,
            seed,
            cap,
            approximate_count,
            sampled,
        },
    )
}

fn perm_log_probability<S: Scalar>(
    p: &Permutation,
    support: &Support,
    degrees: &[u32],
    cfg: &LikelihoodConfig,
) -> Result<S> {
    perm::log_probability_with(p, support.graph(), degrees, cfg.mode)
}

/// Exact maximum-likelihood scores over every node of `support`.
pub fn exact_mle<S: Scalar>(support: &Support, cfg: &LikelihoodConfig) -> Result<SourceScores<S>> {
    score_support(support, &EstimatorKind::Exact, cfg, 0, DEFAULT_CAP)
}

/// Adapter running a likelihood estimator at every tracing stage. Stage `n`
/// uses the seed `derive(seed, [n])`.
#[derive(Debug, Clone)]
pub struct LikelihoodEstimator {
    pub kind: EstimatorKind,
    pub config: LikelihoodConfig,
    pub seed: u64,
    pub cap: usize,
}

impl LikelihoodEstimator {
    pub fn new(kind: EstimatorKind, config: LikelihoodConfig, seed: u64) -> Self {
        LikelihoodEstimator {
            kind,
            config,
            seed,
            cap: DEFAULT_CAP,
        }
    }
}

impl SourceEstimator for LikelihoodEstimator {
    fn name(&self) -> String {
        self.kind.name().into()
    }

    fn score(&mut self, support: &Support) -> Result<Vec<f64>> {
        let seed = rng::derive(self.seed, &[support.len() as u64]);
        let s: SourceScores<f64> =
            score_support(support, &self.kind, &self.config, seed, self.cap)?;
        Ok(s.scores)
    }
}
