#![allow(dead_code)]

use std::collections::HashSet;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use ratcon::ctree::{ContractionTree, NestedTree, TreeBuilder};
use ratcon::{Edge, NetworkGraph};

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

pub fn graph(n: usize, edges: &[(usize, usize, u64)]) -> NetworkGraph {
    let edges = edges.iter().map(|&(u, v, w)| Edge { u, v, w }).collect();
    NetworkGraph::new(names(n), edges).unwrap()
}

pub fn cycle(n: usize, w: u64) -> NetworkGraph {
    graph(n, &(0..n).map(|i| (i, (i + 1) % n, w)).collect::<Vec<_>>())
}

/// r x c grid, vertices row-major.
pub fn grid(r: usize, c: usize, w: u64) -> NetworkGraph {
    let mut e = Vec::new();
    for i in 0..r {
        for j in 0..c {
            if j + 1 < c {
                e.push((i * c + j, i * c + j + 1, w));
            }
            if i + 1 < r {
                e.push((i * c + j, (i + 1) * c + j, w));
            }
        }
    }
    graph(r * c, &e)
}

/// The 2 x 3 tensor train: A B C over D E F, edges a..g.
pub fn train() -> NetworkGraph {
    NetworkGraph::from_triples(&[
        ("A", "B", 2),
        ("B", "C", 3),
        ("A", "D", 5),
        ("B", "E", 2),
        ("C", "F", 4),
        ("D", "E", 3),
        ("E", "F", 2),
    ])
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Connected planar graph on n vertices: a stacked triangulation with a
/// random share of its edges removed, weights drawn from `weights`.
pub fn random_planar(n: usize, weights: &[u64], rng: &mut impl Rng) -> NetworkGraph {
    assert!(n >= 2);
    let mut edges: Vec<(usize, usize)> = vec![(0, 1)];
    if n >= 3 {
        edges.extend([(1, 2), (0, 2)]);
        let mut faces = vec![[0, 1, 2], [0, 1, 2]];
        for v in 3..n {
            let i = rng.gen_range(0..faces.len());
            let [a, b, c] = faces.swap_remove(i);
            edges.extend([(a, v), (b, v), (c, v)]);
            faces.extend([[a, b, v], [b, c, v], [a, c, v]]);
        }
    }
    let drop = rng.gen_range(0.0..0.6);
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(rng);
    let mut keep: HashSet<usize> = (0..edges.len()).collect();
    for i in order {
        if rng.gen_bool(drop) {
            keep.remove(&i);
            let rest: Vec<(usize, usize)> = keep.iter().map(|&j| edges[j]).collect();
            if !connected(n, &rest) {
                keep.insert(i);
            }
        }
    }
    let mut kept: Vec<usize> = keep.into_iter().collect();
    kept.sort_unstable();
    let triples: Vec<(usize, usize, u64)> =
        kept.into_iter().map(|i| (edges[i].0, edges[i].1, *weights.choose(rng).unwrap())).collect();
    graph(n, &triples)
}

/// Free tree on n >= 2 leaves built by random pairwise joins.
pub fn random_free_tree(n: usize, rng: &mut impl Rng) -> ContractionTree {
    let mut b = TreeBuilder::new();
    let mut live: Vec<usize> = (0..n).map(|v| b.leaf(v)).collect();
    while live.len() > 2 {
        let i = rng.gen_range(0..live.len());
        let x = live.swap_remove(i);
        let j = rng.gen_range(0..live.len());
        let y = live.swap_remove(j);
        live.push(b.join(x, y));
    }
    b.finish_free(live[0], live[1])
}

/// Rooted tree over the given leaves by random bipartition.
pub fn random_nested(leaves: &[usize], rng: &mut impl Rng) -> NestedTree {
    if leaves.len() == 1 {
        return NestedTree::Leaf(leaves[0]);
    }
    let mut v = leaves.to_vec();
    v.shuffle(rng);
    let k = rng.gen_range(1..v.len());
    NestedTree::node(random_nested(&v[..k], rng), random_nested(&v[k..], rng))
}

/// Product of the weights of edges leaving `set` (bitmask over vertices).
pub fn boundary_weight(g: &NetworkGraph, set: u64) -> BigUint {
    g.edges
        .iter()
        .filter(|e| ((set >> e.u) & 1) != ((set >> e.v) & 1))
        .map(|e| BigUint::from(e.w))
        .product()
}
