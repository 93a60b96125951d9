use malachite_base::num::arithmetic::traits::Pow;
use malachite_base::num::basic::traits::One as _;
use malachite_base::num::logic::traits::SignificantBits;
use malachite_nz::natural::Natural;
use malachite_nz::platform::Limb;
use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::{bfs_tree, subtree_sizes, Graph, NodeId, RootedTree};
use crate::scalar::Scalar;

/// `ln |Ω(v)|` for every node of a tree, in two O(N) passes.
///
/// Rooted at node 0, `|Ω(0)| = n! / ∏ t_u` over subtree sizes `t_u`; moving
/// the root from `p` to a child `c` multiplies the count by `t_c / (n - t_c)`.
pub fn tree_log_counts<S: Scalar>(t: &Graph) -> Result<Vec<S>> {
    let (rt, size) = rooted(t)?;
    let n = t.node_count();
    let ln = |x: usize| (x as f64).ln();
    let mut root = (1..=n).map(ln).sum::<f64>();
    for &s in &size {
        root -= ln(s);
    }
    let mut out = vec![0f64; n];
    out[rt.root.index()] = root;
    for &v in rt.order.iter().skip(1) {
        let p = rt.parent[v.index()].expect("non-root has a parent");
        let tc = size[v.index()];
        out[v.index()] = out[p.index()] + ln(tc) - ln(n - tc);
    }
    Ok(out.into_iter().map(S::of).collect())
}

/// Exact `|Ω(v)|` for every node of a tree.
pub fn tree_counts_exact(t: &Graph) -> Result<Vec<BigUint>> {
    let (rt, size) = rooted(t)?;
    let n = t.node_count();
    let mut fact = BigUint::one();
    for k in 2..=n {
        fact *= k;
    }
    let mut den = BigUint::one();
    for &s in &size {
        den *= s;
    }
    let mut out = vec![BigUint::one(); n];
    out[rt.root.index()] = fact / den;
    for &v in rt.order.iter().skip(1) {
        let p = rt.parent[v.index()].expect("non-root has a parent");
        let tc = size[v.index()];
        out[v.index()] = &out[p.index()] * tc / (n - tc);
    }
    Ok(out)
}

/// Exact `|Ω(v)|` for one node of a tree, `n! / ∏ subtree sizes`.
///
/// The quotient is assembled from prime exponents (Legendre's formula for
/// `n!`, minus the factorizations of the sizes) and multiplied out with a
/// balanced product tree, so no big division is needed.
pub fn count_permutations_tree(t: &Graph, v: NodeId) -> Result<BigUint> {
    t.check(v)?;
    let size = rooted_sizes(t, v)?;
    let n = t.node_count();
    let spf = smallest_prime_factors(n);
    let mut exp = vec![0i64; n + 1];
    for p in 2..=n {
        if spf[p] == p {
            let mut q = n / p;
            while q > 0 {
                exp[p] += q as i64;
                q /= p;
            }
        }
    }
    for &s in &size {
        let mut x = s;
        while x > 1 {
            exp[spf[x]] -= 1;
            x /= spf[x];
        }
    }
    let factors: Vec<Natural> = (2..=n)
        .filter(|&p| exp[p] > 0)
        .map(|p| Natural::from(p as u64).pow(exp[p] as u64))
        .collect();
    let limbs = product(&factors).to_limbs_asc();
    let per = std::mem::size_of::<Limb>() / 4;
    let digits: Vec<u32> = limbs
        .iter()
        .flat_map(|&l| (0..per).map(move |k| (u64::from(l) >> (32 * k)) as u32))
        .collect();
    Ok(BigUint::new(digits))
}

/// Product of `xs`, split where the running bit count reaches half so both
/// halves of every multiplication are about the same size.
fn product(xs: &[Natural]) -> Natural {
    match xs {
        [] => Natural::ONE,
        [x] => x.clone(),
        _ => {
            let total: u64 = xs.iter().map(|x| x.significant_bits()).sum();
            let mut acc = 0;
            let mut cut = xs.len() - 1;
            for (i, x) in xs.iter().enumerate() {
                acc += x.significant_bits();
                if 2 * acc >= total {
                    cut = (i + 1).clamp(1, xs.len() - 1);
                    break;
                }
            }
            product(&xs[..cut]) * product(&xs[cut..])
        }
    }
}

fn smallest_prime_factors(n: usize) -> Vec<usize> {
    let mut spf: Vec<usize> = (0..=n).collect();
    let mut p = 2;
    while p * p <= n {
        if spf[p] == p {
            for m in (p * p..=n).step_by(p) {
                if spf[m] == m {
                    spf[m] = p;
                }
            }
        }
        p += 1;
    }
    spf
}

fn rooted(t: &Graph) -> Result<(RootedTree, Vec<usize>)> {
    if t.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if !t.is_tree() {
        return Err(Error::NotATree);
    }
    let rt = bfs_tree(t, NodeId(0))?;
    let size = subtree_sizes(&rt);
    Ok((rt, size))
}

/// Subtree sizes of a tree rooted at `v`.
pub(crate) fn rooted_sizes(t: &Graph, v: NodeId) -> Result<Vec<usize>> {
    if !t.is_tree() {
        return Err(Error::NotATree);
    }
    Ok(subtree_sizes(&bfs_tree(t, v)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::enumerate_permitted;

    #[test]
    fn path_and_star() {
        let p = Graph::from_edges(&[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            count_permutations_tree(&p, NodeId(1)).unwrap(),
            BigUint::from(2u32)
        );
        assert_eq!(
            count_permutations_tree(&p, NodeId(0)).unwrap(),
            BigUint::from(1u32)
        );
        let s = Graph::from_edges(&[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(
            count_permutations_tree(&s, NodeId(0)).unwrap(),
            BigUint::from(6u32)
        );
    }

    #[test]
    fn five_star() {
        let s = Graph::from_edges(&[(2, 0), (2, 1), (2, 3), (2, 4)]).unwrap();
        let c = tree_counts_exact(&s).unwrap();
        let want: Vec<BigUint> = [6u32, 6, 24, 6, 6].iter().map(|&x| x.into()).collect();
        assert_eq!(c, want);
    }

    #[test]
    fn log_table_matches_exact() {
        let t = Graph::from_edges(&[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5), (5, 6)]).unwrap();
        let logs: Vec<f64> = tree_log_counts(&t).unwrap();
        for v in t.nodes() {
            let n = enumerate_permitted(&t, v, 1 << 20).unwrap().len() as f64;
            assert!((logs[v.index()] - n.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_node_matches_table() {
        let t = Graph::from_edges(&[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5), (5, 6), (6, 7), (0, 8)]).unwrap();
        let all = tree_counts_exact(&t).unwrap();
        for v in t.nodes() {
            assert_eq!(count_permutations_tree(&t, v).unwrap(), all[v.index()]);
        }
        let one = Graph::empty(1);
        assert_eq!(count_permutations_tree(&one, NodeId(0)).unwrap(), BigUint::one());
    }

    #[test]
    fn non_tree_rejected() {
        let c = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(tree_log_counts::<f64>(&c), Err(Error::NotATree)));
    }
}
