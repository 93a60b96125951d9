use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{LikelihoodConfig, ProbabilityMode};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::scalar::Scalar;
use crate::support::Support;

/// A candidate infection order over local ids of a support graph; the first
/// node is the candidate source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<NodeId>);

impl Permutation {
    pub fn source(&self) -> NodeId {
        self.0[0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the order covers every node of `g` exactly once and each
    /// node after the first touches an earlier one.
    pub fn is_permitted(&self, g: &Graph) -> bool {
        self.phis(g).is_some()
    }

    /// Φ_i, the number of earlier neighbors of each element (Φ_1 := 1), or
    /// `None` when the order is not permitted.
    pub(crate) fn phis(&self, g: &Graph) -> Option<Vec<u32>> {
        let n = g.node_count();
        if self.0.len() != n || n == 0 {
            return None;
        }
        let mut placed = vec![false; n];
        let mut phis = Vec::with_capacity(n);
        for (i, &v) in self.0.iter().enumerate() {
            if !g.contains(v) || placed[v.index()] {
                return None;
            }
            let phi = g.neighbors(v).iter().filter(|w| placed[w.index()]).count() as u32;
            if i > 0 && phi == 0 {
                return None;
            }
            phis.push(if i == 0 { 1 } else { phi });
            placed[v.index()] = true;
        }
        Some(phis)
    }
}

/// Denominators of each factor `Φ_i / den_i`, i = 2..n, as exact integers.
fn denominators(
    perm: &Permutation,
    phis: &[u32],
    degrees: &[u32],
    mode: ProbabilityMode,
) -> Result<Vec<i64>> {
    let mut out = Vec::with_capacity(perm.len().saturating_sub(1));
    let mut degree_sum = 0i64;
    let mut internal = 0i64;
    for i in 1..perm.len() {
        let prev = perm.0[i - 1];
        degree_sum += degrees[prev.index()] as i64;
        // Φ of the node just placed adds its edges to the internal count
        if i > 1 {
            internal += phis[i - 1] as i64;
        }
        // i is zero-based here; the one-based position is i + 1
        let den = match mode {
            ProbabilityMode::Literal => degree_sum - 2 * ((i as i64 + 1) - phis[i - 1] as i64 - 1),
            ProbabilityMode::Boundary => degree_sum - 2 * internal,
        };
        if den <= 0 {
            return Err(Error::FormulaDegenerate {
                position: i + 1,
                value: den,
            });
        }
        out.push(den);
    }
    Ok(out)
}

/// Log-probability of `perm` starting at its first node. Non-permitted
/// orders have probability zero (`-inf`).
pub fn permutation_log_probability<S: Scalar>(
    perm: &Permutation,
    support: &Support,
    cfg: &LikelihoodConfig,
) -> Result<S> {
    let degrees = cfg.degrees(support)?;
    log_probability_with(perm, support.graph(), &degrees, cfg.mode)
}

pub(crate) fn log_probability_with<S: Scalar>(
    perm: &Permutation,
    g: &Graph,
    degrees: &[u32],
    mode: ProbabilityMode,
) -> Result<S> {
    let Some(phis) = perm.phis(g) else {
        return Ok(S::neg_infinity());
    };
    let dens = denominators(perm, &phis, degrees, mode)?;
    let mut acc = S::zero();
    for (i, den) in dens.into_iter().enumerate() {
        acc += S::of(phis[i + 1] as f64).ln() - S::of(den as f64).ln();
    }
    Ok(acc)
}

/// The same probability as an exact rational.
pub fn permutation_probability_exact(
    perm: &Permutation,
    support: &Support,
    cfg: &LikelihoodConfig,
) -> Result<BigRational> {
    let g = support.graph();
    let Some(phis) = perm.phis(g) else {
        return Ok(BigRational::zero());
    };
    let degrees = cfg.degrees(support)?;
    let dens = denominators(perm, &phis, &degrees, cfg.mode)?;
    let mut p = BigRational::one();
    for (i, den) in dens.into_iter().enumerate() {
        p *= BigRational::new(BigInt::from(phis[i + 1]), BigInt::from(den));
    }
    Ok(p)
}

/// All permitted permutations rooted at `v`, in lexicographic order.
pub fn enumerate_permitted(g: &Graph, v: NodeId, cap: usize) -> Result<Vec<Permutation>> {
    g.check(v)?;
    let n = g.node_count();
    let mut out = Vec::new();
    let mut prefix = vec![v];
    let mut placed = vec![false; n];
    placed[v.index()] = true;
    // touching[u] = number of placed neighbors of u
    let mut touching = vec![0u32; n];
    for &w in g.neighbors(v) {
        touching[w.index()] += 1;
    }
    fn rec(
        g: &Graph,
        prefix: &mut Vec<NodeId>,
        placed: &mut [bool],
        touching: &mut [u32],
        out: &mut Vec<Permutation>,
        cap: usize,
    ) -> Result<()> {
        let n = g.node_count();
        if prefix.len() == n {
            if out.len() == cap {
                return Err(Error::EnumerationCap { cap });
            }
            out.push(Permutation(prefix.clone()));
            return Ok(());
        }
        for u in 0..n {
            if placed[u] || touching[u] == 0 {
                continue;
            }
            let u = NodeId::new(u);
            placed[u.index()] = true;
            for &w in g.neighbors(u) {
                touching[w.index()] += 1;
            }
            prefix.push(u);
            rec(g, prefix, placed, touching, out, cap)?;
            prefix.pop();
            for &w in g.neighbors(u) {
                touching[w.index()] -= 1;
            }
            placed[u.index()] = false;
        }
        Ok(())
    }
    rec(g, &mut prefix, &mut placed, &mut touching, &mut out, cap)?;
    if out.is_empty() {
        // disconnected support: nothing covers every node
        return Err(Error::Disconnected);
    }
    Ok(out)
}
