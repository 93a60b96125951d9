//! The three per-node input features.

use crate::error::{Error, Result};
use crate::graph::{multi_source_distances, NodeId, UNREACHABLE};
use crate::scalar::Scalar;
use crate::support::Support;

pub const INPUT_DIM: usize = 3;

/// `d(v) / D` where `d` counts observed contacts and `D` is the degree sum of
/// the whole observed contact network: traced nodes plus their observed
/// outside contacts, `2 Σ d - 2 |internal edges|`.
pub fn degree_ratio<S: Scalar>(support: &Support) -> Result<Vec<S>> {
    if support.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let total: u64 = support.observed_degree.iter().map(|&d| d as u64).sum();
    let denominator = 2 * total - 2 * support.graph().edge_count() as u64;
    if denominator == 0 {
        // a lone node with no contacts
        return Ok(vec![S::one(); support.len()]);
    }
    Ok(support
        .observed_degree
        .iter()
        .map(|&d| S::of(d as f64 / denominator as f64))
        .collect())
}

/// Infected neighbors over observed contacts.
pub fn infected_proportion<S: Scalar>(support: &Support) -> Result<Vec<S>> {
    let g = support.graph();
    if g.node_count() == 1 {
        return Ok(vec![S::one()]);
    }
    g.nodes()
        .map(|v| {
            let d = support.observed_degree[v.index()];
            if d == 0 {
                return Err(Error::IsolatedNode(support.label(v)));
            }
            Ok(S::of(g.degree(v) as f64 / d as f64))
        })
        .collect()
}

/// Boundary distance `b(v)` over its maximum. `b(v)` is the hop count from
/// `v` to the nearest observed contact outside the support (the edge into
/// that contact counts); when nothing outside is observed, the support's
/// leaves stand in as the boundary, at `1 +` their hop distance.
pub fn boundary_distance_ratio<S: Scalar>(support: &Support) -> Result<Vec<S>> {
    let g = support.graph();
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if g.node_count() == 1 {
        return Ok(vec![S::one()]);
    }
    let open: Vec<NodeId> = g
        .nodes()
        .filter(|&v| support.outside_contacts(v) > 0)
        .collect();
    let (sources, offset) = if open.is_empty() {
        (support.boundary(), 1)
    } else {
        (open, 2)
    };
    let hops = multi_source_distances(g, &sources);
    if hops.contains(&UNREACHABLE) {
        return Err(Error::Disconnected);
    }
    let b: Vec<u32> = hops.iter().map(|&h| h + offset).collect();
    let max = *b.iter().max().expect("non-empty") as f64;
    Ok(b.iter().map(|&x| S::of(x as f64 / max)).collect())
}

/// Row-major `n x 3` matrix `[degree ratio, infected proportion, boundary ratio]`.
pub fn node_features<S: Scalar>(support: &Support) -> Result<Vec<S>> {
    let r = degree_ratio::<S>(support)?;
    let p = infected_proportion::<S>(support)?;
    let b = boundary_distance_ratio::<S>(support)?;
    let mut out = Vec::with_capacity(support.len() * INPUT_DIM);
    for i in 0..support.len() {
        out.extend_from_slice(&[r[i], p[i], b[i]]);
    }
    Ok(out)
}
