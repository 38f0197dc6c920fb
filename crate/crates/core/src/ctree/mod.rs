//! Contraction trees: full binary trees whose leaves are the vertices of a
//! network. Arcs carry 2-cuts, internal nodes carry 3-cuts.

mod io;
mod td;

pub use io::{parse_tree, read_tree, tree_json, write_tree, NestedTree};
pub use td::{from_tree_decomposition, to_tree_decomposition, TreeDecomposition};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::netgraph::{CutSet, NetworkGraph};

/// Unlabelled tree shape. Free trees have only degree-1 and degree-3 nodes;
/// rooted trees additionally have one degree-2 root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionTree {
    pub arcs: Vec<(usize, usize)>,
    /// Arc ids at each node.
    pub node_arcs: Vec<Vec<usize>>,
    /// Vertex held by each leaf node.
    pub leaf: Vec<Option<usize>>,
    pub root: Option<usize>,
}

impl ContractionTree {
    pub fn num_nodes(&self) -> usize {
        self.leaf.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf.iter().filter(|l| l.is_some()).count()
    }

    pub fn is_rooted(&self) -> bool {
        self.root.is_some()
    }

    pub fn other_end(&self, arc: usize, node: usize) -> usize {
        let (a, b) = self.arcs[arc];
        if a == node {
            b
        } else {
            a
        }
    }

    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.node_arcs[node].iter().map(move |&a| self.other_end(a, node))
    }

    pub fn leaf_node(&self, vertex: usize) -> Option<usize> {
        self.leaf.iter().position(|&l| l == Some(vertex))
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_nodes()).filter(|&x| self.leaf[x].is_none())
    }

    fn add_node(&mut self, leaf: Option<usize>) -> usize {
        self.leaf.push(leaf);
        self.node_arcs.push(Vec::new());
        self.leaf.len() - 1
    }

    fn add_arc(&mut self, a: usize, b: usize) -> usize {
        self.arcs.push((a, b));
        let id = self.arcs.len() - 1;
        self.node_arcs[a].push(id);
        self.node_arcs[b].push(id);
        id
    }

    /// Degree and leaf-map checks against `n` vertices.
    pub fn check_shape(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for x in 0..self.num_nodes() {
            let deg = self.node_arcs[x].len();
            match self.leaf[x] {
                Some(v) => {
                    if v >= n || seen[v] {
                        return Err(Error::BadLeafMap(format!("leaf node {x} holds vertex {v}")));
                    }
                    seen[v] = true;
                    if deg != 1 {
                        return Err(Error::BadShape(format!("leaf {x} has degree {deg}")));
                    }
                }
                None => {
                    let want = if self.root == Some(x) { 2 } else { 3 };
                    if deg != want {
                        return Err(Error::BadShape(format!("node {x} has degree {deg}")));
                    }
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::BadLeafMap(format!("vertex {v} has no leaf")));
        }
        let nodes = self.num_nodes();
        if nodes > 0 && self.arcs.len() != nodes - 1 {
            return Err(Error::BadShape("not a tree".into()));
        }
        if nodes > 0 && self.reach(0).count_ones(..) != nodes {
            return Err(Error::BadShape("tree is disconnected".into()));
        }
        Ok(())
    }

    fn reach(&self, start: usize) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.num_nodes());
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(x) = stack.pop() {
            for y in self.neighbours(x).collect::<Vec<_>>() {
                if !seen.contains(y) {
                    seen.insert(y);
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Vertices on the `toward` side of `arc`.
    pub fn side(&self, arc: usize, toward: usize, n: usize) -> FixedBitSet {
        let from = self.other_end(arc, toward);
        let mut set = FixedBitSet::with_capacity(n);
        let mut stack = vec![(toward, from)];
        while let Some((x, parent)) = stack.pop() {
            if let Some(v) = self.leaf[x] {
                set.insert(v);
            }
            for y in self.neighbours(x) {
                if y != parent {
                    stack.push((y, x));
                }
            }
        }
        set
    }

    /// Leaf sets below every node when hanging from `top`; index by node.
    fn subtree_sets(&self, top: usize, n: usize) -> (Vec<FixedBitSet>, Vec<Option<usize>>) {
        let mut parent = vec![None; self.num_nodes()];
        let mut order = vec![top];
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for y in self.neighbours(x).collect::<Vec<_>>() {
                if Some(y) != parent[x] && y != top {
                    parent[y] = Some(x);
                    order.push(y);
                }
            }
        }
        let mut sets = vec![FixedBitSet::with_capacity(n); self.num_nodes()];
        for &x in order.iter().rev() {
            if let Some(v) = self.leaf[x] {
                sets[x].insert(v);
            }
            if let Some(p) = parent[x] {
                let s = sets[x].clone();
                sets[p].union_with(&s);
            }
        }
        (sets, parent)
    }

    /// Splits of the tree: for every arc, the side not containing vertex 0.
    /// Two free trees over the same vertices are equal iff their sorted
    /// split lists are.
    pub fn splits(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.arcs.len())
            .map(|a| {
                let (x, _) = self.arcs[a];
                let mut s = self.side(a, x, n);
                if s.contains(0) {
                    s.toggle_range(..);
                }
                s.ones().collect::<Vec<_>>()
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Rooted tree from a nested shape.
    pub fn from_nested(t: &NestedTree) -> ContractionTree {
        let mut tree = ContractionTree { arcs: vec![], node_arcs: vec![], leaf: vec![], root: None };
        fn build(t: &NestedTree, tree: &mut ContractionTree) -> usize {
            match t {
                NestedTree::Leaf(v) => tree.add_node(Some(*v)),
                NestedTree::Node(l, r) => {
                    let x = tree.add_node(None);
                    let a = build(l, tree);
                    let b = build(r, tree);
                    tree.add_arc(x, a);
                    tree.add_arc(x, b);
                    x
                }
            }
        }
        let top = build(t, &mut tree);
        if tree.leaf[top].is_none() {
            tree.root = Some(top);
        }
        tree
    }

    /// Nested view with children ordered by their smallest vertex.
    pub fn to_nested(&self) -> Result<NestedTree> {
        let root = self.root.ok_or_else(|| Error::BadShape("tree is not rooted".into()))?;
        let n = self.leaf.iter().filter_map(|&l| l).max().map_or(0, |v| v + 1);
        let (sets, parent) = self.subtree_sets(root, n);
        fn build(
            t: &ContractionTree,
            x: usize,
            sets: &[FixedBitSet],
            parent: &[Option<usize>],
        ) -> NestedTree {
            if let Some(v) = t.leaf[x] {
                return NestedTree::Leaf(v);
            }
            let mut kids: Vec<usize> = t.neighbours(x).filter(|&y| parent[y] == Some(x)).collect();
            kids.sort_by_key(|&y| sets[y].minimum());
            NestedTree::Node(
                Box::new(build(t, kids[0], sets, parent)),
                Box::new(build(t, kids[1], sets, parent)),
            )
        }
        Ok(build(self, root, &sets, &parent))
    }

    /// Free tree from a list of splits (one per arc), as produced by leaf
    /// insertion. Every split is given as the side not containing vertex 0.
    pub fn from_splits(n: usize, splits: &[u32]) -> ContractionTree {
        assert!(n >= 2 && splits.len() == 2 * n - 3);
        let mut order: Vec<u32> = splits.to_vec();
        order.sort_by_key(|s| s.count_ones());
        let mut tree = ContractionTree { arcs: vec![], node_arcs: vec![], leaf: vec![], root: None };
        // Each split's arc hangs from the node covering it; build bottom-up by
        // merging the maximal proper sub-splits.
        let mut node_of = std::collections::HashMap::new();
        for &s in &order {
            let node = if s.count_ones() == 1 {
                tree.add_node(Some(s.trailing_zeros() as usize))
            } else {
                let x = tree.add_node(None);
                let kids: Vec<u32> = order
                    .iter()
                    .copied()
                    .filter(|&c| c != s && c & s == c)
                    .filter(|&c| !order.iter().any(|&d| d != s && d != c && d & s == d && c & d == c))
                    .collect();
                for c in kids {
                    let y = node_of[&c];
                    tree.add_arc(x, y);
                }
                x
            };
            node_of.insert(s, node);
        }
        // The arc of leaf 0 carries the full split and is the only maximal one.
        let full: u32 = ((1u64 << n) - 2) as u32;
        let zero = tree.add_node(Some(0));
        tree.add_arc(zero, node_of[&full]);
        tree
    }

    /// Subdivides `arc` with a new degree-2 root.
    pub fn root_at(&self, arc: usize) -> Result<ContractionTree> {
        if self.root.is_some() {
            return Err(Error::BadShape("tree is already rooted".into()));
        }
        if arc >= self.arcs.len() {
            return Err(Error::NoSuchArc(arc));
        }
        let mut t = self.clone();
        let (x, y) = t.arcs[arc];
        let r = t.add_node(None);
        t.arcs[arc] = (x, r);
        t.node_arcs[r].push(arc);
        let new = t.arcs.len();
        t.arcs.push((r, y));
        t.node_arcs[r].push(new);
        let slot = t.node_arcs[y].iter().position(|&a| a == arc).unwrap();
        t.node_arcs[y][slot] = new;
        t.root = Some(r);
        Ok(t)
    }

    /// Removes the root and splices its two arcs into one.
    pub fn unroot(&self) -> Result<ContractionTree> {
        let r = self.root.ok_or_else(|| Error::BadShape("tree is not rooted".into()))?;
        let mut t = self.clone();
        let (mut a1, mut a2) = (t.node_arcs[r][0], t.node_arcs[r][1]);
        if a1 > a2 {
            std::mem::swap(&mut a1, &mut a2);
        }
        let y = t.other_end(a2, r);
        let (p, q) = t.arcs[a1];
        t.arcs[a1] = if p == r { (y, q) } else { (p, y) };
        let slot = t.node_arcs[y].iter().position(|&a| a == a2).unwrap();
        t.node_arcs[y][slot] = a1;
        t.node_arcs[r].clear();
        t.root = None;
        t.remove_arc(a2);
        t.remove_node(r);
        Ok(t)
    }

    fn remove_arc(&mut self, arc: usize) {
        self.arcs.remove(arc);
        for list in &mut self.node_arcs {
            list.retain(|&a| a != arc);
            for a in list.iter_mut() {
                if *a > arc {
                    *a -= 1;
                }
            }
        }
    }

    fn remove_node(&mut self, node: usize) {
        self.leaf.remove(node);
        self.node_arcs.remove(node);
        for (a, b) in &mut self.arcs {
            if *a > node {
                *a -= 1;
            }
            if *b > node {
                *b -= 1;
            }
        }
        if let Some(r) = self.root.as_mut() {
            if *r > node {
                *r -= 1;
            }
        }
    }
}

/// Incremental builder used by the contraction-history assembly.
#[derive(Clone, Debug, Default)]
pub struct TreeBuilder {
    tree: Option<ContractionTree>,
}

impl TreeBuilder {
    pub fn new() -> TreeBuilder {
        TreeBuilder {
            tree: Some(ContractionTree { arcs: vec![], node_arcs: vec![], leaf: vec![], root: None }),
        }
    }

    fn t(&mut self) -> &mut ContractionTree {
        self.tree.as_mut().expect("builder already finished")
    }

    pub fn leaf(&mut self, v: usize) -> usize {
        self.t().add_node(Some(v))
    }

    /// New internal node joined to `a` and `b`.
    pub fn join(&mut self, a: usize, b: usize) -> usize {
        let t = self.t();
        let x = t.add_node(None);
        t.add_arc(x, a);
        t.add_arc(x, b);
        x
    }

    /// Connects the last two subtrees by an arc, giving a free tree.
    pub fn finish_free(mut self, a: usize, b: usize) -> ContractionTree {
        self.t().add_arc(a, b);
        self.tree.take().unwrap()
    }
}

/// A tree together with its cut labels for a given graph.
#[derive(Clone, Debug)]
pub struct LabeledTree {
    pub tree: ContractionTree,
    pub arc_label: Vec<CutSet>,
    /// Labels of internal nodes (and the root); `None` on leaves.
    pub node_label: Vec<Option<CutSet>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub n: usize,
    pub bs: BigUint,
    pub bt: BigUint,
    pub ct: BigUint,
    pub bs_log2: f64,
    pub bt_log2: f64,
    pub ct_log2: f64,
}

pub fn big_log2(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap().log2()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap().log2() + shift as f64
    }
}

/// Computes all arc and node labels of `shape` over `g`.
pub fn label_tree(shape: &ContractionTree, g: &NetworkGraph) -> Result<LabeledTree> {
    shape.check_shape(g.n())?;
    let n = g.n();
    let top = shape.root.unwrap_or(0);
    let (sets, parent) = shape.subtree_sets(top, n);
    let arc_label: Vec<CutSet> = shape
        .arcs
        .iter()
        .map(|&(a, b)| {
            let child = if parent[b] == Some(a) { b } else { a };
            g.boundary(&sets[child])
        })
        .collect();
    let node_label = (0..shape.num_nodes())
        .map(|x| {
            if shape.leaf[x].is_some() {
                return None;
            }
            let edges =
                shape.node_arcs[x].iter().flat_map(|&a| arc_label[a].edges.iter().copied()).collect();
            Some(CutSet::from_edges(g, edges))
        })
        .collect();
    Ok(LabeledTree { tree: shape.clone(), arc_label, node_label })
}

impl LabeledTree {
    pub fn metrics(&self) -> Metrics {
        let n = self.tree.num_leaves();
        let bs = self.arc_label.iter().map(|c| c.exact.clone()).max().unwrap_or_default();
        let nodes: Vec<&CutSet> = self.node_label.iter().flatten().collect();
        let (bt, ct) = if nodes.is_empty() {
            // Two leaves and one arc: the single contraction it stands for.
            (bs.clone(), bs.clone())
        } else {
            let bt = nodes.iter().map(|c| c.exact.clone()).max().unwrap();
            let ct = nodes.iter().map(|c| c.exact.clone()).sum();
            (bt, ct)
        };
        Metrics {
            n,
            bs_log2: big_log2(&bs),
            bt_log2: big_log2(&bt),
            ct_log2: big_log2(&ct),
            bs,
            bt,
            ct,
        }
    }

    /// w(n)^2 = w(a) w(a') w(a'') at every degree-3 node.
    pub fn node_weight_identity_check(&self) -> bool {
        self.tree.internal_nodes().all(|x| {
            let arcs = &self.tree.node_arcs[x];
            let w = &self.node_label[x].as_ref().unwrap().exact;
            let prod: BigUint = arcs.iter().map(|&a| self.arc_label[a].exact.clone()).product();
            if arcs.len() == 3 {
                w * w == prod
            } else {
                // Root: both arcs and the node carry the same cut.
                arcs.iter().all(|&a| &self.arc_label[a].exact == w)
            }
        })
    }

    /// lab(a) = lab(x) ∩ lab(y) for arcs between internal nodes, and
    /// lab(x) = lab(a) ∪ lab(a') for every pair of arcs at an internal node.
    pub fn label_properties_hold(&self) -> bool {
        let t = &self.tree;
        let inter_ok = t.arcs.iter().enumerate().all(|(a, &(x, y))| {
            match (&self.node_label[x], &self.node_label[y]) {
                (Some(lx), Some(ly)) => {
                    let both: Vec<usize> =
                        lx.edges.iter().copied().filter(|e| ly.contains(*e)).collect();
                    both == self.arc_label[a].edges
                }
                _ => true,
            }
        });
        let union_ok = t.internal_nodes().all(|x| {
            let arcs = &t.node_arcs[x];
            let label = &self.node_label[x].as_ref().unwrap().edges;
            (0..arcs.len()).all(|i| {
                (i + 1..arcs.len()).all(|j| {
                    let mut u: Vec<usize> = self.arc_label[arcs[i]]
                        .edges
                        .iter()
                        .chain(&self.arc_label[arcs[j]].edges)
                        .copied()
                        .collect();
                    u.sort_unstable();
                    u.dedup();
                    &u == label
                })
            })
        });
        inter_ok && union_ok
    }

    /// For every graph edge, the nodes whose label contains it induce a path.
    pub fn path_property_holds(&self, m: usize) -> bool {
        let t = &self.tree;
        (0..m).all(|e| {
            let holders: Vec<usize> = (0..t.num_nodes())
                .filter(|&x| self.node_label[x].as_ref().is_some_and(|l| l.contains(e)))
                .collect();
            if holders.is_empty() {
                return true;
            }
            let set: FixedBitSet = {
                let mut s = FixedBitSet::with_capacity(t.num_nodes());
                holders.iter().for_each(|&x| s.insert(x));
                s
            };
            let mut degree_ok = true;
            let mut inner_arcs = 0;
            for &x in &holders {
                let d = t.neighbours(x).filter(|&y| set.contains(y)).count();
                degree_ok &= d <= 2;
                inner_arcs += d;
            }
            degree_ok && inner_arcs / 2 == holders.len() - 1 && connected_within(t, &set, holders[0])
        })
    }
}

fn connected_within(t: &ContractionTree, set: &FixedBitSet, start: usize) -> bool {
    let mut seen = FixedBitSet::with_capacity(t.num_nodes());
    let mut stack = vec![start];
    seen.insert(start);
    while let Some(x) = stack.pop() {
        for y in t.neighbours(x).collect::<Vec<_>>() {
            if set.contains(y) && !seen.contains(y) {
                seen.insert(y);
                stack.push(y);
            }
        }
    }
    seen.count_ones(..) == set.count_ones(..)
}
