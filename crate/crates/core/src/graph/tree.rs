use super::{bfs_tree, Graph, NodeId, RootedTree};
use crate::error::{Error, Result};

/// Size of the subtree hanging below each node (0 for unreachable nodes).
pub fn subtree_sizes(t: &RootedTree) -> Vec<usize> {
    let mut size = vec![0usize; t.node_count()];
    for &v in t.order.iter().rev() {
        size[v.index()] += 1;
        if let Some(p) = t.parent[v.index()] {
            size[p.index()] += size[v.index()];
        }
    }
    size
}

/// For each node of a tree, the size of the largest component left after
/// deleting it.
pub fn max_component_after_removal(g: &Graph) -> Result<Vec<usize>> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    let n = g.node_count();
    let t = bfs_tree(g, NodeId(0))?;
    let size = subtree_sizes(&t);
    let mut worst = vec![0usize; n];
    for v in g.nodes() {
        worst[v.index()] = n - size[v.index()];
    }
    for v in g.nodes() {
        if let Some(p) = t.parent[v.index()] {
            let w = &mut worst[p.index()];
            *w = (*w).max(size[v.index()]);
        }
    }
    Ok(worst)
}

/// The one or two nodes minimizing the largest remaining component, ascending.
pub fn centroid(g: &Graph) -> Result<Vec<NodeId>> {
    let worst = max_component_after_removal(g)?;
    let best = *worst.iter().min().expect("non-empty");
    Ok(g.nodes().filter(|v| worst[v.index()] == best).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_centroids() {
        let odd = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(centroid(&odd).unwrap(), vec![NodeId(2)]);
        let even = Graph::from_edges(&[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(centroid(&even).unwrap(), vec![NodeId(1), NodeId(2)]);
    }

    #[test]
    fn sizes_sum_along_root() {
        let g = Graph::from_edges(&[(0, 1), (0, 2), (2, 3), (2, 4)]).unwrap();
        let t = bfs_tree(&g, NodeId(0)).unwrap();
        assert_eq!(subtree_sizes(&t), vec![5, 1, 3, 1, 1]);
    }

    #[test]
    fn cycle_has_no_centroid() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(centroid(&g), Err(Error::NotATree)));
    }
}
