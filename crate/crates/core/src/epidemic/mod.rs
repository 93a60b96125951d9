//! Synthetic contact graphs and SI spreading.

mod generate;

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Subgraph};
use crate::rng::{self, stream};

pub use generate::{
    generate, generate_reported, giant_component, Family, GenerationReport, GeneratorSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontierRule {
    /// Uniform over boundary edges: a susceptible node is picked with
    /// probability proportional to its number of infected neighbors.
    #[default]
    EdgeUniform,
    /// Uniform over susceptible nodes adjacent to the infected set.
    NodeUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiConfig {
    pub stop_fraction: f64,
    #[serde(default)]
    pub frontier_rule: FrontierRule,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SiConfig {
    fn default() -> Self {
        SiConfig {
            stop_fraction: 0.2,
            frontier_rule: FrontierRule::EdgeUniform,
            seed: 0,
        }
    }
}

impl SiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.stop_fraction > 0.0 && self.stop_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stop fraction {} outside (0, 1]",
                self.stop_fraction
            )));
        }
        Ok(())
    }

    /// Number of infected nodes at which spreading halts on `n` nodes.
    pub fn target(&self, n: usize) -> usize {
        ((self.stop_fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n.max(1))
    }
}

/// A contact graph with one completed SI outbreak on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EpidemicRepr", into = "EpidemicRepr")]
pub struct EpidemicNetwork {
    base: Arc<Graph>,
    infected: Vec<NodeId>,
    infector: Vec<Option<NodeId>>,
    rank: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct EpidemicRepr {
    base: Graph,
    infected: Vec<NodeId>,
    infector: Vec<Option<NodeId>>,
}

impl From<EpidemicNetwork> for EpidemicRepr {
    fn from(e: EpidemicNetwork) -> Self {
        EpidemicRepr {
            base: Arc::unwrap_or_clone(e.base),
            infected: e.infected,
            infector: e.infector,
        }
    }
}

impl TryFrom<EpidemicRepr> for EpidemicNetwork {
    type Error = Error;
    fn try_from(r: EpidemicRepr) -> Result<Self> {
        EpidemicNetwork::new(Arc::new(r.base), r.infected, r.infector)
    }
}

const NOT_INFECTED: u32 = u32::MAX;

impl EpidemicNetwork {
    /// Validates that `infected` is a spreading order on `base` and that each
    /// recorded infector is an earlier-infected neighbor.
    pub fn new(
        base: Arc<Graph>,
        infected: Vec<NodeId>,
        infector: Vec<Option<NodeId>>,
    ) -> Result<Self> {
        if infected.is_empty() {
            return Err(Error::EmptyRecord);
        }
        if infector.len() != infected.len() {
            return Err(Error::LengthMismatch {
                left: infected.len(),
                right: infector.len(),
            });
        }
        let mut rank = vec![NOT_INFECTED; base.node_count()];
        for (i, &v) in infected.iter().enumerate() {
            base.check(v)?;
            if rank[v.index()] != NOT_INFECTED {
                return Err(Error::InvalidPermutation(format!(
                    "node {v} infected twice"
                )));
            }
            rank[v.index()] = i as u32;
        }
        for (i, (&v, &by)) in infected.iter().zip(&infector).enumerate() {
            match (i, by) {
                (0, None) => {}
                (0, Some(_)) => {
                    return Err(Error::InvalidPermutation("source has an infector".into()))
                }
                (_, None) => {
                    return Err(Error::InvalidPermutation(format!(
                        "node {v} has no infector"
                    )))
                }
                (_, Some(u)) => {
                    let ok =
                        base.contains(u) && (rank[u.index()] as usize) < i && base.has_edge(u, v);
                    if !ok {
                        return Err(Error::InvalidPermutation(format!(
                            "node {v} cannot be infected by {u} at step {i}"
                        )));
                    }
                }
            }
        }
        Ok(EpidemicNetwork {
            base,
            infected,
            infector,
            rank,
        })
    }

    /// Builds the record from an order alone, taking the earliest-infected
    /// neighbor as each node's infector.
    pub fn from_order(base: Arc<Graph>, infected: Vec<NodeId>) -> Result<Self> {
        let mut rank = vec![NOT_INFECTED; base.node_count()];
        let mut infector = Vec::with_capacity(infected.len());
        for (i, &v) in infected.iter().enumerate() {
            base.check(v)?;
            let by = base
                .neighbors(v)
                .iter()
                .filter(|u| rank[u.index()] != NOT_INFECTED)
                .min_by_key(|u| rank[u.index()])
                .copied();
            if i > 0 && by.is_none() {
                return Err(Error::InvalidPermutation(format!(
                    "node {v} has no earlier-infected neighbor"
                )));
            }
            infector.push(if i == 0 { None } else { by });
            rank[v.index()] = i as u32;
        }
        Self::new(base, infected, infector)
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<Graph> {
        &self.base
    }

    pub fn source(&self) -> NodeId {
        self.infected[0]
    }

    pub fn infected(&self) -> &[NodeId] {
        &self.infected
    }

    pub fn infector(&self, v: NodeId) -> Option<NodeId> {
        self.rank(v).and_then(|i| self.infector[i])
    }

    pub fn len(&self) -> usize {
        self.infected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infected.is_empty()
    }

    pub fn is_infected(&self, v: NodeId) -> bool {
        self.rank(v).is_some()
    }

    /// Zero-based position of `v` in the infection order.
    pub fn rank(&self, v: NodeId) -> Option<usize> {
        self.rank
            .get(v.index())
            .filter(|&&r| r != NOT_INFECTED)
            .map(|&r| r as usize)
    }

    pub fn infected_mask(&self) -> Vec<bool> {
        self.rank.iter().map(|&r| r != NOT_INFECTED).collect()
    }

    /// G_N in the base id space: every base edge between infected nodes.
    pub fn network(&self) -> Graph {
        self.base.restrict(&self.infected_mask())
    }

    /// G_N relabelled compactly.
    pub fn induced(&self) -> Subgraph {
        self.base
            .induced(&self.infected)
            .expect("infected nodes belong to the base graph")
    }

    /// Who-infected-whom tree, in the base id space.
    pub fn infection_tree(&self) -> Graph {
        let edges: Vec<(u32, u32)> = self
            .infected
            .iter()
            .zip(&self.infector)
            .filter_map(|(v, by)| by.map(|u| (u.0, v.0)))
            .collect();
        Graph::with_node_count(self.base.node_count(), &edges).expect("validated at construction")
    }

    /// The same outbreak, but with contacts limited to the infection tree.
    pub fn on_infection_tree(&self) -> EpidemicNetwork {
        EpidemicNetwork {
            base: Arc::new(self.infection_tree()),
            infected: self.infected.clone(),
            infector: self.infector.clone(),
            rank: self.rank.clone(),
        }
    }
}

pub fn random_source(g: &Graph, seed: u64) -> Result<NodeId> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut r = rng::rng(seed, &[stream::SOURCE]);
    Ok(NodeId::new(r.gen_range(0..g.node_count())))
}

/// Runs SI spreading from `source` until `cfg.target(n)` nodes are infected.
pub fn simulate_si(g: Arc<Graph>, source: NodeId, cfg: &SiConfig) -> Result<EpidemicNetwork> {
    cfg.validate()?;
    g.check(source)?;
    let n = g.node_count();
    let target = cfg.target(n);
    let mut r = rng::rng(cfg.seed, &[stream::SPREAD]);
    let mut infected_flag = vec![false; n];
    let mut infected = vec![source];
    let mut infector = vec![None];
    infected_flag[source.index()] = true;

    match cfg.frontier_rule {
        FrontierRule::EdgeUniform => {
            // every (infected, susceptible) edge appears once; entries whose
            // target got infected meanwhile are dropped when drawn
            let mut boundary: Vec<(NodeId, NodeId)> =
                g.neighbors(source).iter().map(|&w| (source, w)).collect();
            while infected.len() < target {
                if boundary.is_empty() {
                    return Err(Error::Disconnected);
                }
                let i = r.gen_range(0..boundary.len());
                let (u, w) = boundary.swap_remove(i);
                if infected_flag[w.index()] {
                    continue;
                }
                infected_flag[w.index()] = true;
                infected.push(w);
                infector.push(Some(u));
                boundary.extend(
                    g.neighbors(w)
                        .iter()
                        .filter(|x| !infected_flag[x.index()])
                        .map(|&x| (w, x)),
                );
            }
        }
        FrontierRule::NodeUniform => {
            let mut frontier: Vec<NodeId> = Vec::new();
            let mut slot = vec![usize::MAX; n];
            let push = |frontier: &mut Vec<NodeId>, slot: &mut Vec<usize>, x: NodeId| {
                if slot[x.index()] == usize::MAX {
                    slot[x.index()] = frontier.len();
                    frontier.push(x);
                }
            };
            for &w in g.neighbors(source) {
                push(&mut frontier, &mut slot, w);
            }
            while infected.len() < target {
                if frontier.is_empty() {
                    return Err(Error::Disconnected);
                }
                let i = r.gen_range(0..frontier.len());
                let w = frontier.swap_remove(i);
                if let Some(&moved) = frontier.get(i) {
                    slot[moved.index()] = i;
                }
                let parents: Vec<NodeId> = g
                    .neighbors(w)
                    .iter()
                    .copied()
                    .filter(|x| infected_flag[x.index()])
                    .collect();
                let u = parents[r.gen_range(0..parents.len())];
                infected_flag[w.index()] = true;
                infected.push(w);
                infector.push(Some(u));
                for &x in g.neighbors(w) {
                    if !infected_flag[x.index()] {
                        push(&mut frontier, &mut slot, x);
                    }
                }
            }
        }
    }
    EpidemicNetwork::new(g, infected, infector)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32) -> Arc<Graph> {
        let e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Arc::new(Graph::from_edges(&e).unwrap())
    }

    #[test]
    fn single_infection() {
        let cfg = SiConfig {
            stop_fraction: 0.1,
            ..Default::default()
        };
        let e = simulate_si(path(10), NodeId(3), &cfg).unwrap();
        assert_eq!(e.infected(), &[NodeId(3)]);
    }

    #[test]
    fn path_from_end_is_forced() {
        for rule in [FrontierRule::EdgeUniform, FrontierRule::NodeUniform] {
            let cfg = SiConfig {
                stop_fraction: 1.0,
                frontier_rule: rule,
                seed: 5,
            };
            let e = simulate_si(path(6), NodeId(0), &cfg).unwrap();
            let want: Vec<_> = (0..6).map(NodeId).collect();
            assert_eq!(e.infected(), want.as_slice());
        }
    }

    #[test]
    fn target_uses_ceiling() {
        let cfg = SiConfig::default();
        assert_eq!(cfg.target(250), 50);
        assert_eq!(cfg.target(251), 51);
        assert_eq!(cfg.target(3), 1);
    }

    #[test]
    fn orders_are_valid_and_deterministic() {
        let spec = GeneratorSpec::new(Family::BarabasiAlbert { m: 2 }, 200, 2);
        let g = Arc::new(generate(&spec).unwrap());
        for rule in [FrontierRule::EdgeUniform, FrontierRule::NodeUniform] {
            let cfg = SiConfig {
                stop_fraction: 0.3,
                frontier_rule: rule,
                seed: 17,
            };
            let a = simulate_si(g.clone(), NodeId(9), &cfg).unwrap();
            let b = simulate_si(g.clone(), NodeId(9), &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 60);
            assert!(a.induced().graph.is_connected());
            assert!(a.infection_tree().restrict(&a.infected_mask()).edge_count() == 59);
        }
    }

    #[test]
    fn tampered_order_rejected() {
        let g = path(4);
        assert!(EpidemicNetwork::from_order(g.clone(), vec![NodeId(0), NodeId(2)]).is_err());
        assert!(EpidemicNetwork::from_order(g, vec![NodeId(1), NodeId(2), NodeId(0)]).is_ok());
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let e = simulate_si(path(8), NodeId(4), &SiConfig::default()).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<EpidemicNetwork>(&json).unwrap(), e);
        let bad = json.replace("\"infector\":[null,", "\"infector\":[null,7,");
        assert!(serde_json::from_str::<EpidemicNetwork>(&bad).is_err());
    }

    #[test]
    fn random_source_repeatable() {
        let g = Graph::empty(1);
        assert_eq!(random_source(&g, 3).unwrap(), NodeId(0));
        let g = Graph::empty(10);
        assert_eq!(random_source(&g, 8).unwrap(), random_source(&g, 8).unwrap());
        assert!(random_source(&Graph::empty(0), 1).is_err());
    }
}
