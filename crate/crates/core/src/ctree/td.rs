//! Bridge between contraction trees and tree-decompositions of the line
//! graph L(G), whose vertices are the edges of G.

use std::collections::BTreeSet;

use num_bigint::BigUint;

use super::{ContractionTree, LabeledTree};
use crate::error::{Error, Result};
use crate::netgraph::NetworkGraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    /// Sorted edge ids of G in each bag.
    pub bags: Vec<Vec<usize>>,
    pub arcs: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn weighted_width(&self, g: &NetworkGraph) -> BigUint {
        self.bags
            .iter()
            .map(|b| b.iter().map(|&e| BigUint::from(g.edges[e].w)).product())
            .max()
            .unwrap_or_default()
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.arcs {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Checks that the bags form a tree-decomposition of L(G): every edge is
    /// covered, edges sharing an endpoint share a bag, and the bags holding
    /// any one edge form a connected subtree.
    pub fn validate(&self, g: &NetworkGraph) -> Result<()> {
        let k = self.bags.len();
        let bad = |msg: String| Err(Error::InvalidDecomposition(msg));
        if k == 0 {
            return bad("no bags".into());
        }
        if self.arcs.len() != k - 1 || self.arcs.iter().any(|&(a, b)| a >= k || b >= k || a == b) {
            return bad("bag graph is not a tree".into());
        }
        let adj = self.neighbours();
        if reach(&adj, 0, |_| true).len() != k {
            return bad("bag graph is disconnected".into());
        }
        let holds = |x: usize, e: usize| self.bags[x].binary_search(&e).is_ok();
        for e in 0..g.m() {
            let holders: Vec<usize> = (0..k).filter(|&x| holds(x, e)).collect();
            let Some(&first) = holders.first() else {
                return bad(format!("edge {e} is in no bag"));
            };
            if reach(&adj, first, |x| holds(x, e)).len() != holders.len() {
                return bad(format!("bags holding edge {e} are not connected"));
            }
        }
        for v in 0..g.n() {
            let inc = g.incident_edges(v);
            for (i, &e) in inc.iter().enumerate() {
                for &f in &inc[i + 1..] {
                    if !(0..k).any(|x| holds(x, e) && holds(x, f)) {
                        return bad(format!("edges {e} and {f} share vertex {v} but no bag"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn reach(adj: &[Vec<usize>], start: usize, ok: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut out = vec![start];
    seen[start] = true;
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        i += 1;
        for &y in &adj[x] {
            if !seen[y] && ok(y) {
                seen[y] = true;
                out.push(y);
            }
        }
    }
    out
}

/// Bags are the node labels (3-cuts) of the internal nodes; leaves are
/// stripped. A two-leaf tree yields one bag holding its single cut.
pub fn to_tree_decomposition(t: &LabeledTree) -> TreeDecomposition {
    let tree = &t.tree;
    let internal: Vec<usize> = tree.internal_nodes().collect();
    if internal.is_empty() {
        return TreeDecomposition { bags: vec![t.arc_label[0].edges.clone()], arcs: vec![] };
    }
    let mut index = vec![usize::MAX; tree.num_nodes()];
    for (i, &x) in internal.iter().enumerate() {
        index[x] = i;
    }
    let bags = internal.iter().map(|&x| t.node_label[x].as_ref().unwrap().edges.clone()).collect();
    let arcs = tree
        .arcs
        .iter()
        .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
        .map(|&(a, b)| (index[a], index[b]))
        .collect();
    TreeDecomposition { bags, arcs }
}

/// Turns any tree-decomposition of L(G) into a free contraction tree whose
/// width is no larger:
///
/// 1. hang a leaf for each vertex v off the first bag containing all of
///    edges(v), relabel every node by the edges whose leaf-to-leaf path
///    crosses it, then drop leafless branches and splice degree-2 nodes;
/// 2. arcs are labelled by intersection, implicitly, through `label_tree`;
/// 3. split nodes of degree above three, peeling off the pair of arcs whose
///    label union is lightest (ties to the smaller arc).
pub fn from_tree_decomposition(td: &TreeDecomposition, g: &NetworkGraph) -> Result<ContractionTree> {
    td.validate(g)?;
    if g.n() < 2 {
        return Err(Error::InvalidDecomposition("graph needs at least two vertices".into()));
    }
    let k = td.bags.len();
    let n = g.n();
    // Nodes 0..k are bags, k..k+n the new leaves.
    let mut adj: Vec<BTreeSet<usize>> = td.neighbours().into_iter().map(|v| v.into_iter().collect()).collect();
    adj.resize(k + n, BTreeSet::new());
    for v in 0..n {
        let inc = g.incident_edges(v);
        let at = (0..k)
            .find(|&x| inc.iter().all(|e| td.bags[x].binary_search(e).is_ok()))
            .ok_or_else(|| Error::InvalidDecomposition(format!("no bag covers edges of vertex {v}")))?;
        adj[at].insert(k + v);
        adj[k + v].insert(at);
    }
    let is_leaf = |x: usize| (k..k + n).contains(&x);

    // Drop leafless branches, then splice degree-2 internal nodes.
    let mut alive = vec![true; k + n];
    let mut changed = true;
    while changed {
        changed = false;
        for x in 0..k {
            if alive[x] && adj[x].len() <= 1 {
                alive[x] = false;
                for y in std::mem::take(&mut adj[x]) {
                    adj[y].remove(&x);
                }
                changed = true;
            }
        }
    }
    for x in 0..k {
        if alive[x] && adj[x].len() == 2 {
            let nb: Vec<usize> = adj[x].iter().copied().collect();
            alive[x] = false;
            adj[x].clear();
            adj[nb[0]].remove(&x);
            adj[nb[1]].remove(&x);
            adj[nb[0]].insert(nb[1]);
            adj[nb[1]].insert(nb[0]);
        }
    }

    // Cut of the side of arc (x -> y) containing y, by leaf membership.
    let side_weight_edges = |adj: &[BTreeSet<usize>], x: usize, y: usize| -> BTreeSet<usize> {
        let mut inside = vec![false; n];
        let mut stack = vec![(y, x)];
        while let Some((z, p)) = stack.pop() {
            if is_leaf(z) {
                inside[z - k] = true;
            }
            for &w in &adj[z] {
                if w != p {
                    stack.push((w, z));
                }
            }
        }
        (0..g.m()).filter(|&e| inside[g.edges[e].u] != inside[g.edges[e].v]).collect()
    };
    let weight = |s: &BTreeSet<usize>| -> BigUint { s.iter().map(|&e| BigUint::from(g.edges[e].w)).product() };

    // Split high-degree nodes.
    let mut stack: Vec<usize> = (0..k).filter(|&x| alive[x] && adj[x].len() > 3).collect();
    while let Some(x) = stack.pop() {
        if adj[x].len() <= 3 {
            continue;
        }
        let nb: Vec<usize> = adj[x].iter().copied().collect();
        let labels: Vec<BTreeSet<usize>> = nb.iter().map(|&y| side_weight_edges(&adj, x, y)).collect();
        let mut best: Option<(BigUint, usize, usize)> = None;
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let w = weight(&labels[i].union(&labels[j]).copied().collect());
                if best.as_ref().is_none_or(|(bw, _, _)| w < *bw) {
                    best = Some((w, i, j));
                }
            }
        }
        let (_, i, j) = best.unwrap();
        let m1 = adj.len();
        adj.push(BTreeSet::new());
        alive.push(true);
        for y in [nb[i], nb[j]] {
            adj[x].remove(&y);
            adj[y].remove(&x);
            adj[y].insert(m1);
            adj[m1].insert(y);
        }
        adj[x].insert(m1);
        adj[m1].insert(x);
        stack.push(x);
    }

    // Export, numbering nodes in order.
    let live: Vec<usize> = (0..adj.len()).filter(|&x| alive[x]).collect();
    let mut index = vec![usize::MAX; adj.len()];
    for (i, &x) in live.iter().enumerate() {
        index[x] = i;
    }
    let mut tree = ContractionTree {
        arcs: vec![],
        node_arcs: vec![Vec::new(); live.len()],
        leaf: live.iter().map(|&x| if is_leaf(x) { Some(x - k) } else { None }).collect(),
        root: None,
    };
    for &x in &live {
        for &y in &adj[x] {
            if x < y {
                tree.add_arc(index[x], index[y]);
            }
        }
    }
    tree.check_shape(n)?;
    Ok(tree)
}
