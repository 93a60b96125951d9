use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::{self, stream, Rng};

const MAX_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    ErdosRenyi { p: f64 },
    BarabasiAlbert { m: usize },
    WattsStrogatz { k: usize, beta: f64 },
    RandomRegularTree { degree: usize },
    CompleteNaryTree { arity: usize },
    RandomTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub size: usize,
    #[serde(default)]
    pub seed: u64,
}

/// How a generated graph was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationReport {
    /// Number of draws made (1 when the first draw was connected).
    pub attempts: u64,
    /// True when every draw was disconnected and the giant component of the
    /// last one was kept instead; the graph is then smaller than requested.
    pub giant_component: bool,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameters(msg.into())
}

impl GeneratorSpec {
    pub fn new(family: Family, size: usize, seed: u64) -> Self {
        GeneratorSpec { family, size, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.size;
        if n == 0 {
            return Err(bad("size must be positive"));
        }
        match self.family {
            Family::ErdosRenyi { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad(format!("edge probability {p} outside [0, 1]")));
                }
            }
            Family::BarabasiAlbert { m } => {
                if m == 0 || m >= n {
                    return Err(bad(format!("attachment count {m} must be in [1, {n})")));
                }
            }
            Family::WattsStrogatz { k, beta } => {
                if k % 2 == 1 || k == 0 || k >= n {
                    return Err(bad(format!("ring degree {k} must be even and in [2, {n})")));
                }
                if !(0.0..=1.0).contains(&beta) {
                    return Err(bad(format!("rewire probability {beta} outside [0, 1]")));
                }
            }
            Family::RandomRegularTree { degree } => {
                if degree < 2 || degree >= n.max(3) {
                    return Err(bad(format!("regular degree {degree} must be in [2, {n})")));
                }
                if n > 2 && (n - 2) % (degree - 1) != 0 {
                    return Err(bad(format!(
                        "no tree on {n} nodes has all internal degrees {degree}"
                    )));
                }
            }
            Family::CompleteNaryTree { arity } => {
                if arity == 0 {
                    return Err(bad("arity must be positive"));
                }
            }
            Family::RandomTree => {}
        }
        Ok(())
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Graph> {
    generate_reported(spec).map(|(g, _)| g)
}

/// Draws until a connected graph appears (at most 100 draws on independent
/// sub-seeds), then falls back to the giant component of the last draw.
pub fn generate_reported(spec: &GeneratorSpec) -> Result<(Graph, GenerationReport)> {
    spec.validate()?;
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut r = rng::rng(spec.seed, &[stream::GENERATE, attempt]);
        let g = draw(spec, &mut r)?;
        if g.is_connected() {
            return Ok((
                g,
                GenerationReport {
                    attempts: attempt + 1,
                    giant_component: false,
                },
            ));
        }
        last = Some(g);
    }
    let g = giant_component(&last.expect("at least one draw"))?;
    Ok((
        g,
        GenerationReport {
            attempts: MAX_ATTEMPTS,
            giant_component: true,
        },
    ))
}

/// Largest connected component, relabelled compactly (lowest id on ties).
pub fn giant_component(g: &Graph) -> Result<Graph> {
    let comp = g.components();
    let k = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut size = vec![0usize; k];
    for &c in &comp {
        size[c] += 1;
    }
    let best = (0..k).max_by_key(|&c| (size[c], std::cmp::Reverse(c)));
    let Some(best) = best else {
        return Err(Error::EmptyGraph);
    };
    let nodes: Vec<NodeId> = g.nodes().filter(|v| comp[v.index()] == best).collect();
    Ok(g.induced(&nodes)?.graph)
}

fn draw(spec: &GeneratorSpec, r: &mut Rng) -> Result<Graph> {
    let n = spec.size;
    let edges = match spec.family {
        Family::ErdosRenyi { p } => erdos_renyi(n, p, r),
        Family::BarabasiAlbert { m } => barabasi_albert(n, m, r),
        Family::WattsStrogatz { k, beta } => watts_strogatz(n, k, beta, r),
        Family::RandomRegularTree { degree } => random_regular_tree(n, degree, r),
        Family::CompleteNaryTree { arity } => {
            (1..n as u32).map(|i| ((i - 1) / arity as u32, i)).collect()
        }
        Family::RandomTree => random_tree(n, r),
    };
    Graph::with_node_count(n, &edges)
}

fn erdos_renyi(n: usize, p: f64, r: &mut Rng) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if r.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Linear preferential attachment: node `t >= m` links to `m` distinct
/// earlier nodes chosen proportionally to degree; node `m` links to `0..m`.
fn barabasi_albert(n: usize, m: usize, r: &mut Rng) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    let mut repeated: Vec<u32> = Vec::new();
    let mut targets: Vec<u32> = (0..m as u32).collect();
    for t in m as u32..n as u32 {
        for &s in &targets {
            edges.push((s, t));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat(t).take(m));
        targets.clear();
        while targets.len() < m {
            let c = repeated[r.gen_range(0..repeated.len())];
            if !targets.contains(&c) {
                targets.push(c);
            }
        }
    }
    edges
}

fn watts_strogatz(n: usize, k: usize, beta: f64, r: &mut Rng) -> Vec<(u32, u32)> {
    let mut adj: Vec<std::collections::BTreeSet<u32>> = vec![Default::default(); n];
    let add = |adj: &mut Vec<std::collections::BTreeSet<u32>>, u: u32, v: u32| {
        adj[u as usize].insert(v);
        adj[v as usize].insert(u);
    };
    for u in 0..n {
        for j in 1..=k / 2 {
            add(&mut adj, u as u32, ((u + j) % n) as u32);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = ((u + j) % n) as u32;
            if !r.gen_bool(beta) || !adj[u].contains(&v) {
                continue;
            }
            if adj[u].len() + 1 >= n {
                continue;
            }
            let w = loop {
                let w = r.gen_range(0..n as u32);
                if w as usize != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v as usize].remove(&(u as u32));
            add(&mut adj, u as u32, w);
        }
    }
    let mut edges = Vec::new();
    for (u, set) in adj.iter().enumerate() {
        edges.extend(
            set.iter()
                .filter(|&&v| v as usize > u)
                .map(|&v| (u as u32, v)),
        );
    }
    edges
}

/// Tree whose internal nodes all have degree `d`: start from one node and
/// repeatedly expand a uniformly chosen leaf, then shuffle the labels.
fn random_regular_tree(n: usize, d: usize, r: &mut Rng) -> Vec<(u32, u32)> {
    if n <= 2 {
        return (1..n as u32).map(|i| (0, i)).collect();
    }
    let internal = (n - 2) / (d - 1);
    let mut edges = Vec::with_capacity(n - 1);
    let mut leaves: Vec<u32> = Vec::new();
    let mut next = 1u32;
    for step in 0..internal {
        let (parent, kids) = if step == 0 {
            (0, d)
        } else {
            let i = r.gen_range(0..leaves.len());
            (leaves.swap_remove(i), d - 1)
        };
        for _ in 0..kids {
            edges.push((parent, next));
            leaves.push(next);
            next += 1;
        }
    }
    debug_assert_eq!(next as usize, n);
    relabel(edges, n, r)
}

/// Uniform labelled tree via a random Prüfer sequence.
fn random_tree(n: usize, r: &mut Rng) -> Vec<(u32, u32)> {
    if n <= 2 {
        return (1..n as u32).map(|i| (0, i)).collect();
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| r.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&v| degree[v] == 1)
        .map(std::cmp::Reverse)
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("a leaf exists");
        edges.push((leaf as u32, s as u32));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = leaves.pop().unwrap();
    let std::cmp::Reverse(b) = leaves.pop().unwrap();
    edges.push((a as u32, b as u32));
    edges
}

fn relabel(edges: Vec<(u32, u32)>, n: usize, r: &mut Rng) -> Vec<(u32, u32)> {
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(r);
    edges
        .into_iter()
        .map(|(u, v)| (perm[u as usize], perm[v as usize]))
        .collect()
}
