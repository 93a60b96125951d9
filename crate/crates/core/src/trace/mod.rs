//! Forward contact tracing and analysis of the estimate trajectory.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::epidemic::EpidemicNetwork;
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, NodeId, UNREACHABLE};
use crate::scalar::argmax_set;
use crate::support::Support;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceStrategy {
    Bfs,
    Dfs,
}

/// How an estimator's tied maxima resolve to one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    #[default]
    LowestId,
    HighestId,
    /// Keep the previous estimate if it is among the maxima, else lowest id.
    PreferPrevious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub strategy: TraceStrategy,
    /// Estimate every `skip_interval` stages (and at the last stage); the
    /// stages in between repeat the previous estimate.
    #[serde(default = "one")]
    pub skip_interval: usize,
    #[serde(default)]
    pub tie_rule: TieRule,
}

fn one() -> usize {
    1
}

impl TraceConfig {
    pub fn new(strategy: TraceStrategy) -> Self {
        TraceConfig {
            strategy,
            skip_interval: 1,
            tie_rule: TieRule::LowestId,
        }
    }
}

/// Scores every node of a support (higher is more likely the source).
pub trait SourceEstimator {
    fn name(&self) -> String;
    /// One score per local node of `support`.
    fn score(&mut self, support: &Support) -> Result<Vec<f64>>;
}

impl<F> SourceEstimator for F
where
    F: FnMut(&Support) -> Result<Vec<f64>>,
{
    fn name(&self) -> String {
        "custom".into()
    }
    fn score(&mut self, support: &Support) -> Result<Vec<f64>> {
        self(support)
    }
}

/// Picks one estimate from `scores`; `previous` is a local id.
pub fn select(scores: &[f64], rule: TieRule, previous: Option<NodeId>) -> Result<NodeId> {
    let best = argmax_set(scores);
    let pick = match rule {
        TieRule::LowestId => best.first(),
        TieRule::HighestId => best.last(),
        TieRule::PreferPrevious => previous
            .and_then(|p| best.iter().find(|&&i| i == p.index()))
            .or(best.first()),
    };
    pick.map(|&i| NodeId::new(i)).ok_or(Error::EmptyGraph)
}

/// Incremental BFS or DFS over the infected part of the contact graph.
#[derive(Debug, Clone)]
pub struct TraceState<'a> {
    epidemic: &'a EpidemicNetwork,
    strategy: TraceStrategy,
    traced: Vec<NodeId>,
    in_trace: Vec<bool>,
    /// Traced nodes whose neighbor lists are not exhausted, with a cursor.
    /// Used as a queue for BFS and as a stack for DFS.
    work: VecDeque<(NodeId, usize)>,
}

impl<'a> TraceState<'a> {
    pub fn new(
        epidemic: &'a EpidemicNetwork,
        index_case: NodeId,
        strategy: TraceStrategy,
    ) -> Result<Self> {
        if !epidemic.is_infected(index_case) {
            return Err(Error::NotInfected(index_case));
        }
        let mut in_trace = vec![false; epidemic.base().node_count()];
        in_trace[index_case.index()] = true;
        Ok(TraceState {
            epidemic,
            strategy,
            traced: vec![index_case],
            in_trace,
            work: VecDeque::from([(index_case, 0)]),
        })
    }

    pub fn traced(&self) -> &[NodeId] {
        &self.traced
    }

    pub fn index_case(&self) -> NodeId {
        self.traced[0]
    }

    /// Traces one more infected node; returns it.
    pub fn step(&mut self) -> Result<NodeId> {
        let base = self.epidemic.base();
        loop {
            let slot = match self.strategy {
                TraceStrategy::Bfs => self.work.front_mut(),
                TraceStrategy::Dfs => self.work.back_mut(),
            };
            let Some((u, cursor)) = slot else {
                return Err(Error::TraceComplete);
            };
            let nbrs = base.neighbors(*u);
            while *cursor < nbrs.len() {
                let w = nbrs[*cursor];
                *cursor += 1;
                if !self.in_trace[w.index()] && self.epidemic.is_infected(w) {
                    self.in_trace[w.index()] = true;
                    self.traced.push(w);
                    self.work.push_back((w, 0));
                    return Ok(w);
                }
            }
            match self.strategy {
                TraceStrategy::Bfs => self.work.pop_front(),
                TraceStrategy::Dfs => self.work.pop_back(),
            };
        }
    }

    pub fn support(&self) -> Support {
        Support::traced(self.epidemic, &self.traced).expect("traced nodes are infected")
    }
}

/// The full visit order of a trace (without estimation).
pub fn trace_order(
    epidemic: &EpidemicNetwork,
    index_case: NodeId,
    strategy: TraceStrategy,
) -> Result<Vec<NodeId>> {
    let mut st = TraceState::new(epidemic, index_case, strategy)?;
    loop {
        match st.step() {
            Ok(_) => {}
            Err(Error::TraceComplete) => return Ok(st.traced),
            Err(e) => return Err(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRun {
    pub config: TraceConfig,
    pub estimator: String,
    pub index_case: NodeId,
    /// Visit order; G_n is the subgraph on the first `n` entries.
    pub traced: Vec<NodeId>,
    /// One estimate per stage, `estimates[n - 1]` for G_n.
    pub estimates: Vec<NodeId>,
}

impl TraceRun {
    pub fn stages(&self) -> usize {
        self.estimates.len()
    }

    pub fn support_at(&self, epidemic: &EpidemicNetwork, stage: usize) -> Result<Support> {
        Support::traced(epidemic, &self.traced[..stage])
    }
}

/// Traces until complete, estimating the source after each stage.
pub fn run_trace(
    epidemic: &EpidemicNetwork,
    index_case: NodeId,
    cfg: &TraceConfig,
    estimator: &mut dyn SourceEstimator,
) -> Result<TraceRun> {
    if cfg.skip_interval == 0 {
        return Err(Error::InvalidConfig(
            "skip interval must be positive".into(),
        ));
    }
    let traced = trace_order(epidemic, index_case, cfg.strategy)?;
    let total = traced.len();
    let mut estimates: Vec<NodeId> = Vec::with_capacity(total);
    for n in 1..=total {
        let due = (n - 1) % cfg.skip_interval == 0 || n == total;
        if n == 1 || !due {
            let carry = estimates.last().copied().unwrap_or(index_case);
            estimates.push(carry);
            continue;
        }
        let support = Support::traced(epidemic, &traced[..n])?;
        let scores = estimator.score(&support)?;
        if scores.len() != support.len() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: support.len(),
            });
        }
        let prev = estimates.last().and_then(|&p| support.local(p));
        let pick = select(&scores, cfg.tie_rule, prev)?;
        estimates.push(support.label(pick));
    }
    Ok(TraceRun {
        config: *cfg,
        estimator: estimator.name(),
        index_case,
        traced,
        estimates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    /// Estimate unchanged.
    Stay,
    /// Moved to a node never estimated before.
    New,
    /// Moved back to a node estimated at some earlier stage.
    Revisit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transitions {
    pub stay: usize,
    pub new: usize,
    pub revisit: usize,
    pub tags: Vec<Transition>,
}

pub fn classify_transitions(estimates: &[NodeId]) -> Transitions {
    let mut seen = HashSet::new();
    let mut out = Transitions {
        stay: 0,
        new: 0,
        revisit: 0,
        tags: Vec::with_capacity(estimates.len().saturating_sub(1)),
    };
    if let Some(&first) = estimates.first() {
        seen.insert(first);
    }
    for w in estimates.windows(2) {
        let tag = if w[0] == w[1] {
            out.stay += 1;
            Transition::Stay
        } else if seen.insert(w[1]) {
            out.new += 1;
            Transition::New
        } else {
            out.revisit += 1;
            Transition::Revisit
        };
        out.tags.push(tag);
    }
    out
}

/// Whether the distinct consecutive estimates walk a shortest path of G_N
/// from the first estimate to the last.
pub fn is_shortest_path_trajectory(
    estimates: &[NodeId],
    epidemic: &EpidemicNetwork,
) -> Result<bool> {
    if estimates.is_empty() {
        return Err(Error::EmptyRecord);
    }
    for &v in estimates {
        if !epidemic.is_infected(v) {
            return Err(Error::NotInfected(v));
        }
    }
    let mut walk = estimates.to_vec();
    walk.dedup();
    let net = epidemic.network();
    if walk.windows(2).any(|w| !net.has_edge(w[0], w[1])) {
        return Ok(false);
    }
    let d = bfs_distances(&net, walk[0])[walk.last().unwrap().index()];
    Ok(d != UNREACHABLE && d as usize == walk.len() - 1)
}
