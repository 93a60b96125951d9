//! Undirected simple graphs with dense node ids.
//!
//! [`Graph`] is immutable after construction and stores adjacency in
//! compressed sparse rows, each row sorted ascending. Growing subgraphs (the
//! tracing networks) are expressed either as a same-id-space restriction
//! ([`Graph::restrict`]) or as a compact relabelled copy ([`Graph::induced`]).

mod traversal;
mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use traversal::{
    bfs_distances, bfs_tree, dfs_tree, diameter, distance, eccentricity, multi_source_distances,
    UNREACHABLE,
};
pub use tree::{centroid, max_component_after_removal, subtree_sizes};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn new(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("node index fits in u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphRepr", try_from = "GraphRepr")]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    node_count: usize,
    edges: Vec<(u32, u32)>,
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            node_count: g.node_count(),
            edges: g.edges().map(|(u, v)| (u.0, v.0)).collect(),
        }
    }
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;
    fn try_from(r: GraphRepr) -> Result<Self> {
        Graph::with_node_count(r.node_count, &r.edges)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("nodes", &self.node_count())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Builds a graph whose node count is one past the largest id mentioned.
    pub fn from_edges(edges: &[(u32, u32)]) -> Result<Self> {
        let n = edges
            .iter()
            .map(|&(u, v)| u.max(v) as usize + 1)
            .max()
            .unwrap_or(0);
        Self::with_node_count(n, edges)
    }

    /// Builds a graph on `0..node_count`. Reversed and repeated pairs are
    /// merged; self-loops and out-of-range ids are rejected.
    pub fn with_node_count(node_count: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for x in [u, v] {
                if x as usize >= node_count {
                    return Err(Error::NodeOutOfRange {
                        node: NodeId(x),
                        count: node_count,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(NodeId(u)));
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut degree = vec![0usize; node_count];
        for &(u, v) in &pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..node_count].to_vec();
        let mut targets = vec![NodeId(0); pairs.len() * 2];
        // pairs are sorted by (min, max), which leaves every row ascending
        for &(u, v) in &pairs {
            targets[fill[u as usize]] = NodeId(v);
            fill[u as usize] += 1;
            targets[fill[v as usize]] = NodeId(u);
            fill[v as usize] += 1;
        }
        Ok(Graph { offsets, targets })
    }

    pub fn empty(node_count: usize) -> Self {
        Graph {
            offsets: vec![0; node_count + 1],
            targets: Vec::new(),
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    pub fn check(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: v,
                count: self.node_count(),
            })
        }
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let i = v.index();
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        let i = v.index();
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.offsets
            .windows(2)
            .map(|w| (w[1] - w[0]) as u32)
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        self.offsets
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains(u) && self.contains(v) && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::new)
    }

    /// Each edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }

    /// Component label per node, numbered in order of lowest member id.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(NodeId::new(s));
            while let Some(u) = stack.pop() {
                for &w in self.neighbors(u) {
                    if label[w.index()] == usize::MAX {
                        label[w.index()] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.components().iter().all(|&c| c == 0)
    }

    pub fn is_tree(&self) -> bool {
        self.node_count() > 0 && self.edge_count() + 1 == self.node_count() && self.is_connected()
    }

    /// Same id space, keeping only edges with both ends in `mask`.
    pub fn restrict(&self, mask: &[bool]) -> Graph {
        assert_eq!(mask.len(), self.node_count());
        let edges: Vec<(u32, u32)> = self
            .edges()
            .filter(|(u, v)| mask[u.index()] && mask[v.index()])
            .map(|(u, v)| (u.0, v.0))
            .collect();
        Graph::with_node_count(self.node_count(), &edges).expect("restriction of a valid graph")
    }

    /// Compact induced subgraph. Local ids follow ascending parent ids, so
    /// "lowest local id" and "lowest parent id" agree.
    pub fn induced(&self, nodes: &[NodeId]) -> Result<Subgraph> {
        let mut labels = nodes.to_vec();
        labels.sort_unstable();
        labels.dedup();
        for &v in &labels {
            self.check(v)?;
        }
        let mut local = vec![u32::MAX; self.node_count()];
        for (i, v) in labels.iter().enumerate() {
            local[v.index()] = i as u32;
        }
        let mut edges = Vec::new();
        for (i, &v) in labels.iter().enumerate() {
            for &w in self.neighbors(v) {
                let j = local[w.index()];
                if j != u32::MAX && (i as u32) < j {
                    edges.push((i as u32, j));
                }
            }
        }
        let graph = Graph::with_node_count(labels.len(), &edges)?;
        Ok(Subgraph { graph, labels })
    }
}

/// A compact graph together with the parent ids of its nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    pub graph: Graph,
    /// `labels[local]` is the parent id of local node `local`; ascending.
    pub labels: Vec<NodeId>,
}

impl Subgraph {
    pub fn identity(graph: Graph) -> Self {
        let labels = graph.nodes().collect();
        Subgraph { graph, labels }
    }

    pub fn label(&self, local: NodeId) -> NodeId {
        self.labels[local.index()]
    }

    pub fn local(&self, label: NodeId) -> Option<NodeId> {
        self.labels.binary_search(&label).ok().map(NodeId::new)
    }
}

/// A spanning tree produced by a traversal from `root`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    pub root: NodeId,
    /// `parent[v]`; `None` for the root and for nodes outside the root's component.
    pub parent: Vec<Option<NodeId>>,
    /// Visit order of the reachable nodes, starting with the root.
    pub order: Vec<NodeId>,
    depth: Vec<u32>,
}

impl RootedTree {
    pub(crate) fn new(
        root: NodeId,
        parent: Vec<Option<NodeId>>,
        order: Vec<NodeId>,
        depth: Vec<u32>,
    ) -> Self {
        RootedTree {
            root,
            parent,
            order,
            depth,
        }
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.depth[v.index()] != UNREACHABLE
    }

    /// Hop depth of `v` in the tree, `None` if unreachable.
    pub fn depth(&self, v: NodeId) -> Option<usize> {
        let d = self.depth[v.index()];
        (d != UNREACHABLE).then_some(d as usize)
    }

    pub fn children(&self) -> Vec<Vec<NodeId>> {
        let mut children = vec![Vec::new(); self.node_count()];
        for &v in &self.order {
            if let Some(p) = self.parent[v.index()] {
                children[p.index()].push(v);
            }
        }
        children
    }

    /// The tree's edges as a graph on the same id space.
    pub fn to_graph(&self) -> Graph {
        let edges: Vec<(u32, u32)> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (p.0, v as u32)))
            .collect();
        Graph::with_node_count(self.node_count(), &edges).expect("tree edges are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_construction() {
        let g = Graph::from_edges(&[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn reversed_pair_is_deduplicated() {
        let g = Graph::from_edges(&[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 1]);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(
            Graph::from_edges(&[(0, 0)]),
            Err(Error::SelfLoop(NodeId(0)))
        ));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(
            Graph::with_node_count(2, &[(0, 2)]),
            Err(Error::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn adjacency_sorted() {
        let g = Graph::from_edges(&[(3, 1), (0, 3), (3, 2), (1, 0)]).unwrap();
        for v in g.nodes() {
            assert!(g.neighbors(v).windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(g.neighbors(NodeId(3)), &[NodeId(0), NodeId(1), NodeId(2)]);
    }

    #[test]
    fn induced_relabels_in_parent_order() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let s = g.induced(&[NodeId(3), NodeId(0), NodeId(1)]).unwrap();
        assert_eq!(s.labels, vec![NodeId(0), NodeId(1), NodeId(3)]);
        assert_eq!(s.graph.edge_count(), 2);
        assert_eq!(s.local(NodeId(3)), Some(NodeId(2)));
        assert_eq!(s.local(NodeId(2)), None);
    }

    #[test]
    fn serde_round_trip() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (0, 4)]).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: Graph = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
        assert_eq!(back.node_count(), 5);
    }

    #[test]
    fn tree_detection() {
        assert!(Graph::from_edges(&[(0, 1), (1, 2)]).unwrap().is_tree());
        assert!(!Graph::from_edges(&[(0, 1), (1, 2), (2, 0)])
            .unwrap()
            .is_tree());
        assert!(!Graph::with_node_count(4, &[(0, 1), (2, 3)])
            .unwrap()
            .is_tree());
        assert!(Graph::empty(1).is_tree());
    }
}
