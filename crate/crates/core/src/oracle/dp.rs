use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::ctree::{ContractionTree, NestedTree};
use crate::error::{Error, Result};
use crate::netgraph::NetworkGraph;

pub const MAX_DP_N: usize = 20;

#[derive(Clone, Debug)]
pub struct ExactCt {
    /// Least Ct over all rooted trees.
    pub ct: BigUint,
    /// A rooted tree attaining it.
    pub tree: ContractionTree,
}

/// Minimum rooted-tree Ct by dynamic programming over vertex subsets:
/// cost(S) = min over S = X + Y of cost(X) + cost(Y) + w(d(X,Y)) * w(d(S)).
pub fn exact_min_ct(g: &NetworkGraph) -> Result<ExactCt> {
    Ok(exact_min_ct_budget(g, None)?.expect("no budget"))
}

/// As `exact_min_ct`, giving up with `None` once `budget` has elapsed.
pub fn exact_min_ct_budget(g: &NetworkGraph, budget: Option<Duration>) -> Result<Option<ExactCt>> {
    let n = g.n();
    if n > MAX_DP_N {
        return Err(Error::TooLarge(format!("{n} vertices, subset DP handles at most {MAX_DP_N}")));
    }
    if n < 2 {
        return Err(Error::TooLarge("subset DP needs at least two vertices".into()));
    }
    let start = Instant::now();
    let full = (1usize << n) - 1;
    let size = 1usize << n;

    // log2 of the boundary weight of every subset, by adding vertices one at a time.
    let adj: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|v| {
            g.incident_edges(v)
                .into_iter()
                .map(|e| (g.edges[e].other(v), (g.edges[e].w as f64).log2()))
                .collect()
        })
        .collect();
    let mut blog = vec![0.0f64; size];
    for s in 1..size {
        let v = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        let mut b = blog[rest];
        for &(u, lw) in &adj[v] {
            if u == v {
                continue;
            }
            if rest >> u & 1 == 1 { b -= lw } else { b += lw }
        }
        blog[s] = b;
    }

    let exact_cut = |x: usize, y: usize| -> BigUint {
        let mut w = BigUint::from(1u32);
        for e in &g.edges {
            let (a, b) = (1usize << e.u, 1usize << e.v);
            if (x & a != 0 && y & b != 0) || (x & b != 0 && y & a != 0) {
                w *= e.w;
            }
        }
        w
    };
    let exact_boundary = |s: usize| -> BigUint { exact_cut(s, full & !s) };

    let mut approx = vec![0.0f64; size];
    let mut exact: Vec<BigUint> = vec![BigUint::zero(); size];
    let mut choice = vec![0usize; size];
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for s in 1..size {
        if s & (s - 1) == 0 {
            continue;
        }
        if let Some(b) = budget {
            if s & 0xff == 0 && start.elapsed() > b {
                return Ok(None);
            }
        }
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let bs = blog[s];
        candidates.clear();
        let mut best = f64::INFINITY;
        // X ranges over subsets of S containing its lowest vertex, Y = S \ X nonempty.
        let mut sub = rest;
        loop {
            let x = sub | low;
            if x != s {
                let y = s ^ x;
                let c = approx[x] + approx[y] + (0.5 * (blog[x] + blog[y] + bs)).exp2();
                if c <= best * (1.0 + 1e-9) {
                    best = best.min(c);
                    candidates.push((c, x));
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        approx[s] = best;
        let boundary = exact_boundary(s);
        let mut winner: Option<(BigUint, usize)> = None;
        for &(c, x) in &candidates {
            if !(c <= best * (1.0 + 1e-9)) && best.is_finite() {
                continue;
            }
            let y = s ^ x;
            let total = &exact[x] + &exact[y] + exact_cut(x, y) * &boundary;
            if winner.as_ref().is_none_or(|(w, _)| total < *w) {
                winner = Some((total, x));
            }
        }
        let (total, x) = winner.expect("at least one split");
        exact[s] = total;
        choice[s] = x;
    }

    fn build(s: usize, choice: &[usize]) -> NestedTree {
        if s & (s - 1) == 0 {
            return NestedTree::Leaf(s.trailing_zeros() as usize);
        }
        let x = choice[s];
        NestedTree::node(build(x, choice), build(s ^ x, choice))
    }
    let tree = ContractionTree::from_nested(&build(full, &choice));
    Ok(Some(ExactCt { ct: exact[full].clone(), tree }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctree::label_tree;

    #[test]
    fn small_fixtures() {
        let path = NetworkGraph::from_triples(&[("A", "B", 2), ("B", "C", 3)]);
        let r = exact_min_ct(&path).unwrap();
        assert_eq!(r.ct, 8u32.into());
        assert_eq!(label_tree(&r.tree, &path).unwrap().metrics().ct, 8u32.into());
        let tri = NetworkGraph::from_triples(&[("A", "B", 2), ("B", "C", 3), ("A", "C", 4)]);
        assert_eq!(exact_min_ct(&tri).unwrap().ct, 30u32.into());
        let edge = NetworkGraph::from_triples(&[("A", "B", 7)]);
        assert_eq!(exact_min_ct(&edge).unwrap().ct, 7u32.into());
    }

    #[test]
    fn budget_and_size_limits() {
        let ids: Vec<String> = (0..21).map(|i| format!("v{i}")).collect();
        let edges = (0..20).map(|i| crate::Edge { u: i, v: i + 1, w: 2 }).collect();
        let big = NetworkGraph::new(ids, edges).unwrap();
        assert!(matches!(exact_min_ct(&big), Err(Error::TooLarge(_))));
        let ids: Vec<String> = (0..16).map(|i| format!("v{i}")).collect();
        let edges = (0..15).map(|i| crate::Edge { u: i, v: i + 1, w: 2 }).collect();
        let g = NetworkGraph::new(ids, edges).unwrap();
        assert!(exact_min_ct_budget(&g, Some(Duration::ZERO)).unwrap().is_none());
    }
}
