//! The observed graph a source estimator works on.

use serde::{Deserialize, Serialize};

use crate::epidemic::EpidemicNetwork;
use crate::error::{Error, Result};
use crate::graph::{multi_source_distances, Graph, NodeId, Subgraph, UNREACHABLE};

/// A compact support graph (a tracing network G_n, or a whole G_N) with the
/// degree information of the larger graphs around it. All per-node vectors
/// are indexed by local id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub sub: Subgraph,
    /// Degree counting every observed contact, infected or not.
    pub observed_degree: Vec<u32>,
    /// Degree within the epidemic network G_N.
    pub epidemic_degree: Vec<u32>,
}

impl Support {
    /// A bare graph with nothing observed beyond it.
    pub fn bare(graph: Graph) -> Self {
        let d = graph.degrees();
        Support {
            sub: Subgraph::identity(graph),
            observed_degree: d.clone(),
            epidemic_degree: d,
        }
    }

    /// Tracing network on `traced`: contacts of traced nodes are all observed.
    pub fn traced(epidemic: &EpidemicNetwork, traced: &[NodeId]) -> Result<Self> {
        let base = epidemic.base();
        for &v in traced {
            if !epidemic.is_infected(v) {
                return Err(Error::NotInfected(v));
            }
        }
        let sub = base.induced(traced)?;
        let observed_degree = sub.labels.iter().map(|&v| base.degree(v) as u32).collect();
        let epidemic_degree = sub
            .labels
            .iter()
            .map(|&v| {
                base.neighbors(v)
                    .iter()
                    .filter(|&&w| epidemic.is_infected(w))
                    .count() as u32
            })
            .collect();
        Ok(Support {
            sub,
            observed_degree,
            epidemic_degree,
        })
    }

    /// The fully traced epidemic network G_N.
    pub fn full(epidemic: &EpidemicNetwork) -> Self {
        Self::traced(epidemic, epidemic.infected()).expect("infected nodes are valid")
    }

    pub fn graph(&self) -> &Graph {
        &self.sub.graph
    }

    pub fn len(&self) -> usize {
        self.sub.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sub.labels.is_empty()
    }

    pub fn label(&self, local: NodeId) -> NodeId {
        self.sub.label(local)
    }

    pub fn local(&self, label: NodeId) -> Option<NodeId> {
        self.sub.local(label)
    }

    pub fn tracing_degree(&self, local: NodeId) -> u32 {
        self.sub.graph.degree(local) as u32
    }

    /// Observed contacts of `local` that lie outside the support.
    pub fn outside_contacts(&self, local: NodeId) -> u32 {
        self.observed_degree[local.index()] - self.tracing_degree(local)
    }

    /// Nodes with an observed contact outside the support, or the support's
    /// leaves when there are none (a single node counts as its own boundary).
    pub fn boundary(&self) -> Vec<NodeId> {
        let g = self.graph();
        let open: Vec<NodeId> = g
            .nodes()
            .filter(|&v| self.outside_contacts(v) > 0)
            .collect();
        if !open.is_empty() {
            return open;
        }
        let leaves: Vec<NodeId> = g.nodes().filter(|&v| g.degree(v) <= 1).collect();
        if leaves.is_empty() {
            g.nodes().collect()
        } else {
            leaves
        }
    }

    /// Hop distance from each node to the nearest boundary node.
    pub fn boundary_hops(&self) -> Vec<u32> {
        let d = multi_source_distances(self.graph(), &self.boundary());
        debug_assert!(d.iter().all(|&x| x != UNREACHABLE) || !self.graph().is_connected());
        d
    }
}
