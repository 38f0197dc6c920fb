//! From a free contraction tree to a concrete pairwise contraction order.

use std::collections::HashMap;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::ctree::{label_tree, LabeledTree};
use crate::error::{Error, Result};
use crate::netgraph::NetworkGraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    /// Sorted vertex indices of each operand and of the result.
    pub l: Vec<usize>,
    pub r: Vec<usize>,
    pub result: Vec<usize>,
    /// Weight of the 3-cut of this contraction.
    pub cost: BigUint,
    /// Weight of the 2-cut around the result.
    pub size: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionSequence {
    pub steps: Vec<Step>,
    pub ct: BigUint,
    pub cs_alg1: BigUint,
    pub peak: BigUint,
}

/// Roots a free tree on an arc of least weight (first such arc on ties).
pub fn optimal_root(t: &LabeledTree, g: &NetworkGraph) -> Result<LabeledTree> {
    if t.tree.is_rooted() {
        return Err(Error::BadShape("tree is already rooted".into()));
    }
    let arc = (0..t.arc_label.len())
        .min_by(|&a, &b| t.arc_label[a].exact.cmp(&t.arc_label[b].exact).then(a.cmp(&b)))
        .ok_or_else(|| Error::BadShape("tree has no arcs".into()))?;
    label_tree(&t.tree.root_at(arc)?, g)
}

struct Walk<'a> {
    t: &'a LabeledTree,
    parent_arc: Vec<Option<usize>>,
    kids: Vec<Vec<usize>>,
    set: Vec<Vec<usize>>,
    steps: Vec<Step>,
}

impl Walk<'_> {
    /// Returns (CS, cs) of the subtree at x, appending its steps.
    fn run(&mut self, x: usize) -> (BigUint, BigUint) {
        let t = self.t;
        let cs = match self.parent_arc[x] {
            Some(a) => t.arc_label[a].exact.clone(),
            None => BigUint::from(1u32),
        };
        if t.tree.leaf[x].is_some() {
            return (cs.clone(), cs);
        }
        let (l, r) = (self.kids[x][0], self.kids[x][1]);
        let mark = self.steps.len();
        let (big_l, cs_l) = self.run(l);
        let mid = self.steps.len();
        let (big_r, cs_r) = self.run(r);
        let lfirst = &cs_l + &big_r;
        let rfirst = &cs_r + &big_l;
        let big = if lfirst <= rfirst {
            lfirst
        } else {
            // Right subtree's steps go first.
            let right: Vec<Step> = self.steps.drain(mid..).collect();
            self.steps.splice(mark..mark, right);
            rfirst
        };
        self.steps.push(Step {
            l: self.set[l].clone(),
            r: self.set[r].clone(),
            result: self.set[x].clone(),
            cost: t.node_label[x].as_ref().unwrap().exact.clone(),
            size: cs.clone(),
        });
        (big.max(cs.clone()), cs)
    }
}

/// The memory heuristic on a rooted, labelled tree. Children are ordered
/// left-to-right by their smallest vertex.
pub fn sequence(t: &LabeledTree) -> Result<ContractionSequence> {
    let tree = &t.tree;
    let root = tree.root.ok_or_else(|| Error::BadShape("tree is not rooted".into()))?;
    let k = tree.num_nodes();
    let mut parent_arc = vec![None; k];
    let mut kids = vec![Vec::new(); k];
    let mut order = vec![root];
    let mut seen = vec![false; k];
    seen[root] = true;
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        i += 1;
        for &a in &tree.node_arcs[x] {
            let y = tree.other_end(a, x);
            if !seen[y] {
                seen[y] = true;
                parent_arc[y] = Some(a);
                kids[x].push(y);
                order.push(y);
            }
        }
    }
    let mut set: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &x in order.iter().rev() {
        if let Some(v) = tree.leaf[x] {
            set[x] = vec![v];
        } else {
            let mut s: Vec<usize> = kids[x].iter().flat_map(|&y| set[y].iter().copied()).collect();
            s.sort_unstable();
            set[x] = s;
        }
    }
    for x in 0..k {
        kids[x].sort_by_key(|&y| set[y][0]);
    }
    let mut walk = Walk { t, parent_arc, kids, set, steps: Vec::new() };
    let (cs_alg1, _) = walk.run(root);
    let steps = walk.steps;
    let ct = steps.iter().map(|s| &s.cost).sum();
    let mut seq = ContractionSequence { steps, ct, cs_alg1, peak: BigUint::default() };
    seq.peak = simulate_peak(&seq, &tensor_sizes(t))?;
    Ok(seq)
}

/// Size of each input tensor: the weight of its leaf arc.
fn tensor_sizes(t: &LabeledTree) -> Vec<BigUint> {
    let n = t.tree.num_leaves();
    let mut out = vec![BigUint::from(1u32); n];
    for (x, leaf) in t.tree.leaf.iter().enumerate() {
        if let Some(v) = leaf {
            out[*v] = t.arc_label[t.tree.node_arcs[x][0]].exact.clone();
        }
    }
    out
}

/// Sizes of the input tensors of `g` (products of incident bond dimensions).
pub fn vertex_sizes(g: &NetworkGraph) -> Vec<BigUint> {
    (0..g.n()).map(|v| g.incident_edges(v).iter().map(|&e| BigUint::from(g.edges[e].w)).product()).collect()
}

/// Peak resident memory when the steps run in order: inputs load just before
/// first use, operands and result coexist during a step, operands are freed
/// after it.
pub fn simulate_peak(seq: &ContractionSequence, sizes: &[BigUint]) -> Result<BigUint> {
    let mut live: HashMap<Vec<usize>, BigUint> = HashMap::new();
    let mut loaded = vec![false; sizes.len()];
    let mut resident = BigUint::default();
    let mut peak = BigUint::default();
    for (i, s) in seq.steps.iter().enumerate() {
        for op in [&s.l, &s.r] {
            if op.len() == 1 && !live.contains_key(op) {
                let v = op[0];
                if v >= sizes.len() || loaded[v] {
                    return Err(Error::MalformedSequence(format!("step {i}: vertex {v} reused")));
                }
                loaded[v] = true;
                resident += &sizes[v];
                live.insert(op.clone(), sizes[v].clone());
            }
        }
        let mut freed = BigUint::default();
        for op in [&s.l, &s.r] {
            let size = live
                .remove(op)
                .ok_or_else(|| Error::MalformedSequence(format!("step {i}: operand {op:?} not available")))?;
            freed += size;
        }
        peak = peak.max(&resident + &s.size);
        resident -= freed;
        resident += &s.size;
        live.insert(s.result.clone(), s.size.clone());
    }
    Ok(peak)
}

pub fn flops_lower_bound(ct: &BigUint) -> BigUint {
    ct * 8u32
}

#[derive(Serialize, Deserialize)]
struct StepRecord {
    l: Vec<String>,
    r: Vec<String>,
    cost: String,
    size: String,
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    steps: Vec<StepRecord>,
    ct: String,
    cs_alg1: String,
    peak: String,
}

impl ContractionSequence {
    pub fn to_json(&self, g: &NetworkGraph) -> String {
        let names = |s: &[usize]| s.iter().map(|&v| g.vertices[v].clone()).collect();
        let file = SequenceFile {
            steps: self
                .steps
                .iter()
                .map(|s| StepRecord { l: names(&s.l), r: names(&s.r), cost: s.cost.to_string(), size: s.size.to_string() })
                .collect(),
            ct: self.ct.to_string(),
            cs_alg1: self.cs_alg1.to_string(),
            peak: self.peak.to_string(),
        };
        serde_json::to_string_pretty(&file).expect("sequence serializes")
    }

    pub fn from_json(text: &str, g: &NetworkGraph) -> Result<ContractionSequence> {
        let file: SequenceFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("sequence file: {e}")))?;
        let num = |s: &str, field: String| -> Result<BigUint> {
            s.parse().map_err(|_| Error::Parse(format!("{field}: expected a decimal integer")))
        };
        let ids = |names: &[String], field: String| -> Result<Vec<usize>> {
            let mut out = names
                .iter()
                .map(|n| g.index_of(n).ok_or_else(|| Error::Parse(format!("{field}: unknown vertex {n:?}"))))
                .collect::<Result<Vec<_>>>()?;
            out.sort_unstable();
            Ok(out)
        };
        let mut steps = Vec::new();
        for (i, s) in file.steps.iter().enumerate() {
            let l = ids(&s.l, format!("steps[{i}].l"))?;
            let r = ids(&s.r, format!("steps[{i}].r"))?;
            let mut result: Vec<usize> = l.iter().chain(&r).copied().collect();
            result.sort_unstable();
            steps.push(Step {
                l,
                r,
                result,
                cost: num(&s.cost, format!("steps[{i}].cost"))?,
                size: num(&s.size, format!("steps[{i}].size"))?,
            });
        }
        Ok(ContractionSequence {
            steps,
            ct: num(&file.ct, "ct".into())?,
            cs_alg1: num(&file.cs_alg1, "cs_alg1".into())?,
            peak: num(&file.peak, "peak".into())?,
        })
    }

    pub fn read(path: &Path, g: &NetworkGraph) -> Result<ContractionSequence> {
        Self::from_json(&std::fs::read_to_string(path)?, g)
    }

    /// Checks operand availability, disjointness, the final result, and
    /// recomputes every cost and size from `g`.
    pub fn validate(&self, g: &NetworkGraph) -> Result<()> {
        let n = g.n();
        let bad = |i: usize, msg: &str| Err(Error::MalformedSequence(format!("step {i}: {msg}")));
        if self.steps.len() + 1 != n {
            return Err(Error::MalformedSequence(format!("{} steps for {n} vertices", self.steps.len())));
        }
        let mut live: std::collections::HashSet<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        let mut total = BigUint::default();
        for (i, s) in self.steps.iter().enumerate() {
            if !live.remove(&s.l) || !live.remove(&s.r) {
                return bad(i, "operand not available");
            }
            let mut joined: Vec<usize> = s.l.iter().chain(&s.r).copied().collect();
            joined.sort_unstable();
            if joined != s.result {
                return bad(i, "result is not the union of its operands");
            }
            let mut side = vec![0u8; n];
            s.l.iter().for_each(|&v| side[v] = 1);
            s.r.iter().for_each(|&v| side[v] = 2);
            let (mut cost, mut size) = (BigUint::from(1u32), BigUint::from(1u32));
            for e in &g.edges {
                let (a, b) = (side[e.u], side[e.v]);
                if a != b && (a != 0 || b != 0) {
                    cost *= e.w;
                    if a == 0 || b == 0 {
                        size *= e.w;
                    }
                }
            }
            if cost != s.cost || size != s.size {
                return bad(i, "cost or size disagrees with the graph");
            }
            total += &s.cost;
            live.insert(s.result.clone());
        }
        if total != self.ct {
            return Err(Error::MalformedSequence("ct is not the sum of step costs".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctree::TreeBuilder;

    fn path() -> NetworkGraph {
        NetworkGraph::from_triples(&[("A", "B", 2), ("B", "C", 3)])
    }

    fn free_tree(g: &NetworkGraph) -> LabeledTree {
        let mut b = TreeBuilder::new();
        let (a, bb, c) = (b.leaf(0), b.leaf(1), b.leaf(2));
        let x = b.join(bb, c);
        label_tree(&b.finish_free(a, x), g).unwrap()
    }

    #[test]
    fn path_fixture() {
        let g = path();
        let rooted = optimal_root(&free_tree(&g), &g).unwrap();
        assert_eq!(rooted.metrics().ct, 8u32.into());
        let seq = sequence(&rooted).unwrap();
        assert_eq!(seq.steps.len(), 2);
        assert_eq!((seq.steps[0].l.clone(), seq.steps[0].r.clone()), (vec![1], vec![2]));
        assert_eq!((seq.steps[1].l.clone(), seq.steps[1].r.clone()), (vec![0], vec![1, 2]));
        assert_eq!(seq.cs_alg1, 4u32.into());
        assert_eq!(seq.peak, 11u32.into());
        assert_eq!(seq.ct, 8u32.into());
        seq.validate(&g).unwrap();
        let back = ContractionSequence::from_json(&seq.to_json(&g), &g).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn triangle_root_and_single_edge() {
        let g = NetworkGraph::from_triples(&[("A", "B", 2), ("B", "C", 3), ("A", "C", 4)]);
        let rooted = optimal_root(&free_tree(&g), &g).unwrap();
        assert_eq!(rooted.metrics().ct, 30u32.into());
        let e = NetworkGraph::from_triples(&[("A", "B", 5)]);
        let mut b = TreeBuilder::new();
        let (x, y) = (b.leaf(0), b.leaf(1));
        let t = label_tree(&b.finish_free(x, y), &e).unwrap();
        let seq = sequence(&optimal_root(&t, &e).unwrap()).unwrap();
        assert_eq!(seq.steps.len(), 1);
        assert_eq!(seq.peak, 11u32.into());
        assert_eq!(seq.ct, 5u32.into());
    }

    #[test]
    fn malformed_sequences() {
        let g = path();
        let seq = sequence(&optimal_root(&free_tree(&g), &g).unwrap()).unwrap();
        let mut swapped = seq.clone();
        swapped.steps.swap(0, 1);
        assert!(swapped.validate(&g).is_err());
        assert!(matches!(simulate_peak(&swapped, &vertex_sizes(&g)), Err(Error::MalformedSequence(_))));
        assert_eq!(flops_lower_bound(&24u32.into()), 192u32.into());
    }
}
