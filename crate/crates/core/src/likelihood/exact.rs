//! Exact likelihoods by dynamic programming over connected node subsets.
//!
//! In boundary mode the factor contributed by the next node depends only on
//! the set already infected, so `Σ_σ P(σ|v)` folds into a sum over connected
//! subsets containing `v` (processed size by size). Literal mode also needs
//! Φ of the last node placed, which joins the state.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::count::tree_log_counts;
use super::{DegreeUniverse, LikelihoodConfig, ProbabilityMode};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::scalar::{log_add_exp, Scalar};
use crate::support::Support;

/// Default bound on the number of subset states (and on enumerations).
pub const DEFAULT_CAP: usize = 1_000_000;

const MAX_NODES: usize = 128;

fn masks(g: &Graph) -> Result<Vec<u128>> {
    if g.node_count() > MAX_NODES {
        return Err(Error::InvalidConfig(format!(
            "exact evaluation handles at most {MAX_NODES} nodes, support has {}",
            g.node_count()
        )));
    }
    Ok(g.nodes()
        .map(|v| g.neighbors(v).iter().fold(0u128, |m, w| m | 1 << w.index()))
        .collect())
}

fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// `ln Σ_{σ ∈ Ω(v)} P(σ|v)`.
///
/// Trees take closed forms where one exists: the tracing-network universe
/// gives exactly 1, and a constant universe `d` gives
/// `|Ω(v)| · ∏_{k<n} 1/(k(d-2)+2)`. Everything else runs the subset DP,
/// which fails with [`Error::EnumerationCap`] beyond `cap` states.
pub fn exact_log_likelihood<S: Scalar>(
    support: &Support,
    v: NodeId,
    cfg: &LikelihoodConfig,
    cap: usize,
) -> Result<S> {
    let g = support.graph();
    g.check(v)?;
    let degrees = cfg.degrees(support)?;
    if g.node_count() == 1 {
        return Ok(S::zero());
    }
    if g.is_tree() {
        match cfg.universe {
            DegreeUniverse::TracingNetwork => return Ok(S::zero()),
            DegreeUniverse::Constant(d) => {
                let logs: Vec<S> = tree_log_counts(g)?;
                return Ok(logs[v.index()] + constant_tree_log_probability(g.node_count(), d));
            }
            _ => {}
        }
    }
    subset_dp(g, v, &degrees, cfg.mode, cap)
}

/// Log-probability shared by every permitted permutation of an `n`-node
/// tree when all degrees equal `d`.
pub fn constant_tree_log_probability<S: Scalar>(n: usize, d: u32) -> S {
    let mut acc = S::zero();
    for k in 1..n {
        let boundary = k as f64 * (d as f64 - 2.0) + 2.0;
        acc -= S::of(boundary).ln();
    }
    acc
}

fn subset_dp<S: Scalar>(
    g: &Graph,
    v: NodeId,
    degrees: &[u32],
    mode: ProbabilityMode,
    cap: usize,
) -> Result<S> {
    let adj = masks(g)?;
    let n = g.node_count();
    let full: u128 = if n == MAX_NODES {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    // key: (set, Φ of the last node placed; 0 in boundary mode)
    // value: (log weight, degree sum of set, internal edges of set, frontier)
    type State<S> = (S, i64, i64, u128);
    let start = 1u128 << v.index();
    let mut layer: Vec<((u128, u32), State<S>)> = vec![(
        (
            start,
            if mode == ProbabilityMode::Literal {
                1
            } else {
                0
            },
        ),
        (
            S::zero(),
            degrees[v.index()] as i64,
            0,
            adj[v.index()] & !start,
        ),
    )];
    let mut visited = 1usize;
    for size in 1..n {
        let mut next: HashMap<(u128, u32), State<S>> = HashMap::new();
        for &((set, phi_last), (logw, dsum, internal, frontier)) in &layer {
            let den = match mode {
                ProbabilityMode::Boundary => dsum - 2 * internal,
                ProbabilityMode::Literal => dsum - 2 * (size as i64 + 1 - phi_last as i64 - 1),
            };
            if den <= 0 {
                return Err(Error::FormulaDegenerate {
                    position: size + 1,
                    value: den,
                });
            }
            let log_den = S::of(den as f64).ln();
            for u in bits(frontier) {
                let phi = (adj[u] & set).count_ones();
                let term = logw + S::of(phi as f64).ln() - log_den;
                let nset = set | 1 << u;
                let key = (
                    nset,
                    if mode == ProbabilityMode::Literal {
                        phi
                    } else {
                        0
                    },
                );
                next.entry(key)
                    .and_modify(|s| s.0 = log_add_exp(s.0, term))
                    .or_insert((
                        term,
                        dsum + degrees[u] as i64,
                        internal + phi as i64,
                        (frontier | adj[u]) & !nset,
                    ));
            }
        }
        visited += next.len();
        if visited > cap {
            return Err(Error::EnumerationCap { cap });
        }
        layer = next.into_iter().collect();
        // fixed processing order keeps floating sums reproducible
        layer.sort_unstable_by_key(|&(k, _)| k);
    }
    let total = layer
        .iter()
        .filter(|((set, _), _)| *set == full)
        .fold(S::neg_infinity(), |acc, (_, s)| log_add_exp(acc, s.0));
    if total == S::neg_infinity() {
        return Err(Error::Disconnected);
    }
    Ok(total)
}

/// Exact `|Ω(v)|` on any connected graph (tree formula on trees, subset
/// DP otherwise).
pub fn count_permutations(g: &Graph, v: NodeId, cap: usize) -> Result<BigUint> {
    g.check(v)?;
    if g.is_tree() {
        return super::count::count_permutations_tree(g, v);
    }
    let adj = masks(g)?;
    let n = g.node_count();
    let start = 1u128 << v.index();
    let mut layer: Vec<(u128, (BigUint, u128))> =
        vec![(start, (BigUint::one(), adj[v.index()] & !start))];
    let mut visited = 1usize;
    for _ in 1..n {
        let mut next: HashMap<u128, (BigUint, u128)> = HashMap::new();
        for (set, (count, frontier)) in &layer {
            for u in bits(*frontier) {
                let nset = set | 1 << u;
                let e = next
                    .entry(nset)
                    .or_insert_with(|| (BigUint::zero(), (frontier | adj[u]) & !nset));
                e.0 += count;
            }
        }
        visited += next.len();
        if visited > cap {
            return Err(Error::EnumerationCap { cap });
        }
        layer = next.into_iter().collect();
    }
    match layer.into_iter().next() {
        Some((_, (count, _))) => Ok(count),
        None => Err(Error::Disconnected),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{enumerate_permitted, permutation_log_probability};
    use crate::scalar::log_sum_exp;

    fn by_enumeration(s: &Support, v: NodeId, cfg: &LikelihoodConfig) -> f64 {
        let perms = enumerate_permitted(s.graph(), v, 1 << 20).unwrap();
        let logs: Vec<f64> = perms
            .iter()
            .map(|p| permutation_log_probability(p, s, cfg).unwrap())
            .collect();
        log_sum_exp(&logs)
    }

    #[test]
    fn path_constant_two() {
        let s = Support::bare(Graph::from_edges(&[(0, 1), (1, 2)]).unwrap());
        let cfg = LikelihoodConfig::new(DegreeUniverse::Constant(2), ProbabilityMode::Boundary);
        let got: Vec<f64> = (0..3)
            .map(|v| {
                exact_log_likelihood::<f64>(&s, NodeId(v), &cfg, DEFAULT_CAP)
                    .unwrap()
                    .exp()
            })
            .collect();
        assert!((got[1] - 0.5).abs() < 1e-12);
        assert!((got[0] - 0.25).abs() < 1e-12 && (got[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn dp_matches_enumeration_on_dense_graph() {
        // house graph with a chord
        let g =
            Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4), (0, 2)]).unwrap();
        let mut s = Support::bare(g);
        s.observed_degree = vec![5, 4, 4, 3, 2];
        for universe in [
            DegreeUniverse::ObservedContacts,
            DegreeUniverse::TracingNetwork,
        ] {
            for mode in [ProbabilityMode::Boundary, ProbabilityMode::Literal] {
                let cfg = LikelihoodConfig::new(universe, mode);
                for v in s.graph().nodes() {
                    let a: f64 = exact_log_likelihood(&s, v, &cfg, DEFAULT_CAP).unwrap();
                    let b = by_enumeration(&s, v, &cfg);
                    assert!(
                        (a - b).abs() < 1e-10,
                        "{universe:?} {mode:?} {v}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn tree_shortcuts_match_dp() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)]).unwrap();
        let s = Support::bare(g.clone());
        let cfg = LikelihoodConfig::new(DegreeUniverse::Constant(4), ProbabilityMode::Boundary);
        let degrees = cfg.degrees(&s).unwrap();
        for v in g.nodes() {
            let fast: f64 = exact_log_likelihood(&s, v, &cfg, DEFAULT_CAP).unwrap();
            let slow: f64 = subset_dp(&g, v, &degrees, cfg.mode, DEFAULT_CAP).unwrap();
            assert!((fast - slow).abs() < 1e-12);
            let tracing = vec![1, 3, 1, 3, 1, 1];
            let one: f64 = subset_dp(&g, v, &tracing, cfg.mode, DEFAULT_CAP).unwrap();
            assert!(one.abs() < 1e-12);
        }
    }

    #[test]
    fn general_counts() {
        let c4 = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        // from any node of a 4-cycle: 2 * 2 * 1 orders
        assert_eq!(
            count_permutations(&c4, NodeId(0), DEFAULT_CAP).unwrap(),
            4u32.into()
        );
        let k4 = Graph::from_edges(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(
            count_permutations(&k4, NodeId(2), DEFAULT_CAP).unwrap(),
            6u32.into()
        );
    }

    #[test]
    fn cap_is_enforced() {
        let edges: Vec<_> = (1..20u32).map(|i| (0, i)).collect();
        let mut s = Support::bare(Graph::from_edges(&edges).unwrap());
        s.observed_degree[0] += 3;
        let cfg =
            LikelihoodConfig::new(DegreeUniverse::ObservedContacts, ProbabilityMode::Boundary);
        assert!(matches!(
            exact_log_likelihood::<f64>(&s, NodeId(0), &cfg, 1000),
            Err(Error::EnumerationCap { cap: 1000 })
        ));
    }
}
