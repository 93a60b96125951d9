use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::count::{rooted_sizes, tree_log_counts};
use super::perm::{enumerate_permitted, log_probability_with, Permutation};
use super::ProbabilityMode;
use crate::error::{Error, Result};
use crate::graph::{bfs_tree, Graph, NodeId};
use crate::rng::Rng;
use crate::scalar::{log_sum_exp, Scalar};

/// How random permitted permutations are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingRule {
    /// Grow from the source, adding a frontier node with probability
    /// proportional to its edges into the grown set.
    #[default]
    EdgeUniform,
    /// Grow from the source, adding a uniformly chosen frontier node.
    NodeUniform,
    /// Uniform over Ω(v). Exact on trees (a frontier node is chosen with
    /// probability proportional to its subtree size); on other graphs it is
    /// uniform over the permutations of the BFS spanning tree rooted at v.
    UniformTree,
}

/// Draws one permitted permutation rooted at `v`.
pub fn sample_permutation(
    g: &Graph,
    v: NodeId,
    rule: SamplingRule,
    rng: &mut Rng,
) -> Result<Permutation> {
    PermutationSampler::new(g, v, rule)?.sample(rng)
}

/// Repeated draws from one source, with per-source setup done once.
#[derive(Debug, Clone)]
pub struct PermutationSampler<'g> {
    g: &'g Graph,
    v: NodeId,
    rule: SamplingRule,
    /// Spanning tree used by uniform sampling on non-trees.
    spanning: Option<Graph>,
    /// Subtree sizes rooted at `v` (uniform sampling only).
    weight: Vec<usize>,
}

impl<'g> PermutationSampler<'g> {
    pub fn new(g: &'g Graph, v: NodeId, rule: SamplingRule) -> Result<Self> {
        g.check(v)?;
        let (spanning, weight) = if rule == SamplingRule::UniformTree {
            if g.is_tree() {
                (None, rooted_sizes(g, v)?)
            } else {
                let t = bfs_tree(g, v)?.to_graph();
                let w = rooted_sizes(&t, v).map_err(|_| Error::Disconnected)?;
                (Some(t), w)
            }
        } else {
            (None, Vec::new())
        };
        Ok(PermutationSampler {
            g,
            v,
            rule,
            spanning,
            weight,
        })
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<Permutation> {
        let (g, v) = (self.g, self.v);
        let n = g.node_count();
        let mut placed = vec![false; n];
        placed[v.index()] = true;
        let mut order = Vec::with_capacity(n);
        order.push(v);
        if self.rule == SamplingRule::EdgeUniform {
            let mut edges: Vec<NodeId> = g.neighbors(v).to_vec();
            while order.len() < n {
                if edges.is_empty() {
                    return Err(Error::Disconnected);
                }
                let w = edges.swap_remove(rng.gen_range(0..edges.len()));
                if placed[w.index()] {
                    continue;
                }
                placed[w.index()] = true;
                order.push(w);
                edges.extend(g.neighbors(w).iter().filter(|x| !placed[x.index()]));
            }
            return Ok(Permutation(order));
        }
        let adj = self.spanning.as_ref().unwrap_or(g);
        let mut frontier: Vec<NodeId> = Vec::new();
        let mut in_frontier = vec![false; n];
        let mut total = 0usize;
        let mut grow =
            |u: NodeId, frontier: &mut Vec<NodeId>, placed: &[bool], total: &mut usize| {
                for &x in adj.neighbors(u) {
                    if !placed[x.index()] && !in_frontier[x.index()] {
                        in_frontier[x.index()] = true;
                        *total += self.weight_of(x);
                        frontier.push(x);
                    }
                }
            };
        grow(v, &mut frontier, &placed, &mut total);
        while order.len() < n {
            if frontier.is_empty() {
                return Err(Error::Disconnected);
            }
            let i = if self.rule == SamplingRule::NodeUniform {
                rng.gen_range(0..frontier.len())
            } else {
                let mut r = rng.gen_range(0..total);
                let mut i = 0;
                while r >= self.weight[frontier[i].index()] {
                    r -= self.weight[frontier[i].index()];
                    i += 1;
                }
                i
            };
            let w = frontier.swap_remove(i);
            total -= self.weight_of(w);
            placed[w.index()] = true;
            order.push(w);
            grow(w, &mut frontier, &placed, &mut total);
        }
        Ok(Permutation(order))
    }

    fn weight_of(&self, x: NodeId) -> usize {
        self.weight.get(x.index()).copied().unwrap_or(1)
    }
}

/// BFS from `v` that appends each node's unvisited neighbors in random order.
pub fn random_bfs_permutation(g: &Graph, v: NodeId, rng: &mut Rng) -> Result<Permutation> {
    g.check(v)?;
    let mut seen = vec![false; g.node_count()];
    seen[v.index()] = true;
    let mut order = vec![v];
    let mut queue = VecDeque::from([v]);
    let mut buf: Vec<NodeId> = Vec::new();
    while let Some(u) = queue.pop_front() {
        buf.clear();
        buf.extend(g.neighbors(u).iter().filter(|w| !seen[w.index()]));
        buf.shuffle(rng);
        for &w in &buf {
            seen[w.index()] = true;
            order.push(w);
            queue.push_back(w);
        }
    }
    if order.len() != g.node_count() {
        return Err(Error::Disconnected);
    }
    Ok(Permutation(order))
}

/// `ln |Ω(v)|` for all nodes: exact on trees, otherwise counted on the BFS
/// spanning tree rooted at each node (the flag reports which).
pub fn log_counts<S: Scalar>(g: &Graph) -> Result<(Vec<S>, bool)> {
    if g.is_tree() {
        return Ok((tree_log_counts(g)?, false));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut out = Vec::with_capacity(g.node_count());
    for v in g.nodes() {
        let t = bfs_tree(g, v)?.to_graph();
        out.push(tree_log_counts::<S>(&t)?[v.index()]);
    }
    Ok((out, true))
}

/// `ln[(1/k) Σ P(σ_i|v)]` over `k` sampled permutations.
pub fn sampled_log_average<S: Scalar>(
    g: &Graph,
    v: NodeId,
    degrees: &[u32],
    mode: ProbabilityMode,
    k: usize,
    rule: SamplingRule,
    rng: &mut Rng,
) -> Result<S> {
    if k == 0 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    let sampler = PermutationSampler::new(g, v, rule)?;
    let mut logs = Vec::with_capacity(k);
    for _ in 0..k {
        let p = sampler.sample(rng)?;
        logs.push(log_probability_with::<S>(&p, g, degrees, mode)?);
    }
    Ok(log_sum_exp(&logs) - S::of_usize(k).ln())
}

/// Which single-permutation probability the extreme estimators keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extreme {
    Max,
    Min,
    Random,
}

/// Max, min or random permutation log-probability at `v`. Exact over the
/// enumeration when `|Ω(v)| <= cap`, else over `k` samples; the flag is
/// true in the sampled case.
#[allow(clippy::too_many_arguments)]
pub fn extreme_log_probability<S: Scalar>(
    g: &Graph,
    v: NodeId,
    degrees: &[u32],
    mode: ProbabilityMode,
    which: Extreme,
    k: usize,
    cap: usize,
    rule: SamplingRule,
    rng: &mut Rng,
) -> Result<(S, bool)> {
    let perms = match enumerate_permitted(g, v, cap) {
        Ok(p) => Some(p),
        Err(Error::EnumerationCap { .. }) => None,
        Err(e) => return Err(e),
    };
    let sampled = perms.is_none();
    let perms = match perms {
        Some(p) => p,
        None => {
            let draws = if which == Extreme::Random {
                1
            } else {
                k.max(1)
            };
            let sampler = PermutationSampler::new(g, v, rule)?;
            (0..draws)
                .map(|_| sampler.sample(rng))
                .collect::<Result<_>>()?
        }
    };
    let value = match which {
        Extreme::Random => {
            let p = &perms[rng.gen_range(0..perms.len())];
            log_probability_with(p, g, degrees, mode)?
        }
        Extreme::Max | Extreme::Min => {
            let mut best: Option<S> = None;
            for p in &perms {
                let x: S = log_probability_with(p, g, degrees, mode)?;
                best = Some(match best {
                    None => x,
                    Some(b) if which == Extreme::Max => b.max(x),
                    Some(b) => b.min(x),
                });
            }
            best.expect("at least one permutation")
        }
    };
    Ok((value, sampled))
}
