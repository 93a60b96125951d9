use std::collections::VecDeque;

use super::{Graph, NodeId, RootedTree};
use crate::error::{Error, Result};

/// Distance sentinel for nodes outside the source's component.
pub const UNREACHABLE: u32 = u32::MAX;

/// BFS spanning tree of `root`'s component. Neighbors are enqueued in
/// ascending id order, so ties at equal depth resolve to the lower id.
pub fn bfs_tree(g: &Graph, root: NodeId) -> Result<RootedTree> {
    g.check(root)?;
    let n = g.node_count();
    let mut parent = vec![None; n];
    let mut depth = vec![UNREACHABLE; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    depth[root.index()] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &w in g.neighbors(u) {
            if depth[w.index()] == UNREACHABLE {
                depth[w.index()] = depth[u.index()] + 1;
                parent[w.index()] = Some(u);
                queue.push_back(w);
            }
        }
    }
    Ok(RootedTree::new(root, parent, order, depth))
}

/// DFS (preorder) spanning tree of `root`'s component, exploring the lowest
/// unvisited neighbor first. Iterative, so deep paths do not overflow.
pub fn dfs_tree(g: &Graph, root: NodeId) -> Result<RootedTree> {
    g.check(root)?;
    let n = g.node_count();
    let mut parent = vec![None; n];
    let mut depth = vec![UNREACHABLE; n];
    let mut order = vec![root];
    depth[root.index()] = 0;
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    while let Some((u, cursor)) = stack.last_mut() {
        let u = *u;
        let nbrs = g.neighbors(u);
        while *cursor < nbrs.len() && depth[nbrs[*cursor].index()] != UNREACHABLE {
            *cursor += 1;
        }
        if *cursor == nbrs.len() {
            stack.pop();
            continue;
        }
        let w = nbrs[*cursor];
        depth[w.index()] = depth[u.index()] + 1;
        parent[w.index()] = Some(u);
        order.push(w);
        stack.push((w, 0));
    }
    Ok(RootedTree::new(root, parent, order, depth))
}

/// Hop distances from `source`; [`UNREACHABLE`] outside its component.
pub fn bfs_distances(g: &Graph, source: NodeId) -> Vec<u32> {
    multi_source_distances(g, &[source])
}

/// Hop distance from each node to the nearest of `sources`.
pub fn multi_source_distances(g: &Graph, sources: &[NodeId]) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.node_count()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s.index()] == UNREACHABLE {
            dist[s.index()] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let next = dist[u.index()] + 1;
        for &w in g.neighbors(u) {
            if dist[w.index()] == UNREACHABLE {
                dist[w.index()] = next;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Shortest-path hop count, or `None` when `u` and `v` are disconnected.
pub fn distance(g: &Graph, u: NodeId, v: NodeId) -> Result<Option<usize>> {
    g.check(u)?;
    g.check(v)?;
    if u == v {
        return Ok(Some(0));
    }
    let d = bfs_distances(g, u)[v.index()];
    Ok((d != UNREACHABLE).then_some(d as usize))
}

/// Largest distance from `v` to any node of its component.
pub fn eccentricity(g: &Graph, v: NodeId) -> Result<usize> {
    g.check(v)?;
    Ok(bfs_distances(g, v)
        .into_iter()
        .filter(|&d| d != UNREACHABLE)
        .max()
        .unwrap_or(0) as usize)
}

pub fn diameter(g: &Graph) -> Result<usize> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.is_tree() {
        // double sweep is exact on trees
        let d0 = bfs_distances(g, NodeId(0));
        let far = argmax(&d0);
        let d1 = bfs_distances(g, far);
        return Ok(d1[argmax(&d1).index()] as usize);
    }
    let mut best = 0;
    for v in g.nodes() {
        best = best.max(eccentricity(g, v)?);
    }
    Ok(best)
}

fn argmax(d: &[u32]) -> NodeId {
    let mut best = 0;
    for (i, &x) in d.iter().enumerate() {
        if x != UNREACHABLE && x > d[best] {
            best = i;
        }
    }
    NodeId::new(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(xs: &[u32]) -> Vec<NodeId> {
        xs.iter().map(|&x| NodeId(x)).collect()
    }

    fn star(leaves: u32) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Graph::from_edges(&edges).unwrap()
    }

    #[test]
    fn bfs_star_from_center() {
        let t = bfs_tree(&star(4), NodeId(0)).unwrap();
        assert_eq!(t.order, ids(&[0, 1, 2, 3, 4]));
        assert!((1..=4).all(|l| t.depth(NodeId(l)) == Some(1)));
    }

    #[test]
    fn bfs_path_from_end() {
        let g = Graph::from_edges(&[(0, 1), (1, 2)]).unwrap();
        assert_eq!(bfs_tree(&g, NodeId(0)).unwrap().order, ids(&[0, 1, 2]));
    }

    #[test]
    fn dfs_path_from_middle() {
        let g = Graph::from_edges(&[(0, 1), (1, 2)]).unwrap();
        assert_eq!(dfs_tree(&g, NodeId(1)).unwrap().order, ids(&[1, 0, 2]));
    }

    #[test]
    fn dfs_star_from_center() {
        assert_eq!(
            dfs_tree(&star(3), NodeId(0)).unwrap().order,
            ids(&[0, 1, 2, 3])
        );
    }

    #[test]
    fn dfs_binary_tree_matches_recursive_preorder() {
        // complete binary tree of depth 3, heap layout
        let edges: Vec<_> = (1..15u32).map(|i| ((i - 1) / 2, i)).collect();
        let g = Graph::from_edges(&edges).unwrap();
        fn pre(v: u32, out: &mut Vec<NodeId>) {
            if v >= 15 {
                return;
            }
            out.push(NodeId(v));
            pre(2 * v + 1, out);
            pre(2 * v + 2, out);
        }
        let mut expected = Vec::new();
        pre(0, &mut expected);
        assert_eq!(dfs_tree(&g, NodeId(0)).unwrap().order, expected);
    }

    #[test]
    fn unknown_root_is_error() {
        assert!(bfs_tree(&star(2), NodeId(9)).is_err());
        assert!(dfs_tree(&star(2), NodeId(9)).is_err());
    }

    #[test]
    fn distances() {
        let g = Graph::from_edges(&[(0, 1), (1, 2)]).unwrap();
        assert_eq!(distance(&g, NodeId(0), NodeId(2)).unwrap(), Some(2));
        assert_eq!(distance(&g, NodeId(1), NodeId(1)).unwrap(), Some(0));
        let h = Graph::with_node_count(3, &[(0, 1)]).unwrap();
        assert_eq!(distance(&h, NodeId(0), NodeId(2)).unwrap(), None);
    }

    #[test]
    fn diameters() {
        let path: Vec<_> = (0..6u32).map(|i| (i, i + 1)).collect();
        assert_eq!(diameter(&Graph::from_edges(&path).unwrap()).unwrap(), 6);
        assert_eq!(diameter(&star(5)).unwrap(), 2);
        let cycle = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(diameter(&cycle).unwrap(), 2);
        assert!(matches!(
            diameter(&Graph::with_node_count(3, &[(0, 1)]).unwrap()),
            Err(Error::Disconnected)
        ));
    }
}
