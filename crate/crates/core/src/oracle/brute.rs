use num_bigint::BigUint;

use crate::ctree::{big_log2, ContractionTree, NestedTree};
use crate::error::{Error, Result};
use crate::netgraph::NetworkGraph;

pub const MAX_BRUTE_N: usize = 9;

/// Calls `f` once per free tree on leaves 0..n, each given by its splits
/// (for every arc, the leaf set on the side away from leaf 0). Trees are
/// grown by inserting leaf k into every arc of each tree on k leaves.
pub fn for_each_free_tree(n: usize, mut f: impl FnMut(&[u32])) {
    assert!((2..=31).contains(&n));
    let mut splits = vec![0b10u32];
    grow(&mut splits, 2, n, &mut f);
}

fn grow(splits: &mut Vec<u32>, k: usize, n: usize, f: &mut impl FnMut(&[u32])) {
    if k == n {
        f(splits);
        return;
    }
    let bit = 1u32 << k;
    let len = splits.len();
    for a in 0..len {
        let sa = splits[a];
        for b in 0..len {
            if b != a && splits[b] & sa == sa {
                splits[b] |= bit;
            }
        }
        splits.push(sa | bit);
        splits.push(bit);
        grow(splits, k + 1, n, f);
        splits.truncate(len);
        for s in splits.iter_mut() {
            *s &= !bit;
        }
    }
}

pub fn count_free_trees(n: usize) -> u64 {
    let mut count = 0;
    for_each_free_tree(n, |_| count += 1);
    count
}

pub fn all_free_trees(n: usize) -> Vec<ContractionTree> {
    let mut out = Vec::new();
    for_each_free_tree(n, |s| out.push(ContractionTree::from_splits(n, s)));
    out
}

/// Every rooted tree on leaves 0..n, built from unordered bipartitions of
/// the leaf set rather than by leaf insertion.
pub fn all_rooted_trees(n: usize) -> Vec<NestedTree> {
    assert!((1..=12).contains(&n));
    fn shapes(s: u32) -> Vec<NestedTree> {
        if s.count_ones() == 1 {
            return vec![NestedTree::Leaf(s.trailing_zeros() as usize)];
        }
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut out = Vec::new();
        // Left side holds the lowest leaf; right side is nonempty.
        let mut sub = rest;
        loop {
            let x = sub | low;
            if x != s {
                for l in shapes(x) {
                    for r in shapes(s ^ x) {
                        out.push(NestedTree::node(l.clone(), r));
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        out
    }
    shapes((1u32 << n) - 1)
}

/// Exact Bs(g): the least, over all free trees, of the heaviest arc.
pub fn brute_bs(g: &NetworkGraph) -> Result<BigUint> {
    let n = g.n();
    if n > MAX_BRUTE_N {
        return Err(Error::TooLarge(format!("{n} vertices, enumeration handles at most {MAX_BRUTE_N}")));
    }
    if n < 2 {
        return Err(Error::TooLarge("enumeration needs at least two vertices".into()));
    }
    // Cut weight of every leaf set avoiding vertex 0, replaced by its rank.
    let sets = 1usize << n;
    let mut weight = vec![BigUint::from(1u32); sets];
    for (s, w) in weight.iter_mut().enumerate().step_by(2) {
        for e in &g.edges {
            if (s >> e.u) & 1 != (s >> e.v) & 1 {
                *w *= e.w;
            }
        }
    }
    let mut distinct: Vec<BigUint> = weight.iter().step_by(2).cloned().collect();
    distinct.sort();
    distinct.dedup();
    let rank: Vec<usize> = weight.iter().map(|w| distinct.binary_search(w).unwrap_or(0)).collect();
    let mut best = usize::MAX;
    for_each_free_tree(n, |splits| {
        let worst = splits.iter().map(|&s| rank[s as usize]).max().unwrap();
        best = best.min(worst);
    });
    Ok(distinct[best].clone())
}

/// Carving width in log2 form.
pub fn brute_cw(g: &NetworkGraph) -> Result<f64> {
    Ok(big_log2(&brute_bs(g)?))
}
