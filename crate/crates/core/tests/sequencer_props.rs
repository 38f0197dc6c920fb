mod common;

use std::collections::BTreeSet;

use common::*;
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ratcon::ctree::{label_tree, parse_tree, ContractionTree, NestedTree};
use ratcon::sequencer::{optimal_root, sequence, simulate_peak, vertex_sizes, ContractionSequence};
use ratcon::NetworkGraph;

fn mask(t: &NestedTree) -> u64 {
    match t {
        NestedTree::Leaf(v) => 1 << v,
        NestedTree::Node(l, r) => mask(l) | mask(r),
    }
}

/// (CS, cs) by the recursive definition, straight from vertex sets.
fn eq_cs(g: &NetworkGraph, t: &NestedTree, is_root: bool) -> (BigUint, BigUint) {
    let cs = if is_root { BigUint::from(1u32) } else { boundary_weight(g, mask(t)) };
    match t {
        NestedTree::Leaf(_) => (cs.clone(), cs),
        NestedTree::Node(l, r) => {
            let (big_l, cs_l) = eq_cs(g, l, false);
            let (big_r, cs_r) = eq_cs(g, r, false);
            let inner = (cs_l + &big_r).min(cs_r + &big_l);
            (inner.max(cs.clone()), cs)
        }
    }
}

fn check_sequence(g: &NetworkGraph, seq: &ContractionSequence, ct: &BigUint) {
    seq.validate(g).unwrap();
    assert_eq!(&seq.steps.iter().map(|s| &s.cost).sum::<BigUint>(), ct);
    assert_eq!(seq.steps.len(), g.n() - 1);
    let mut live: BTreeSet<Vec<usize>> = (0..g.n()).map(|v| vec![v]).collect();
    for s in &seq.steps {
        assert!(live.remove(&s.l) && live.remove(&s.r));
        let mut u: Vec<usize> = s.l.iter().chain(&s.r).copied().collect();
        u.sort_unstable();
        assert_eq!(u, s.result);
        live.insert(u);
    }
    assert_eq!(live.len(), 1);
    let peak = simulate_peak(seq, &vertex_sizes(g)).unwrap();
    assert_eq!(peak, seq.peak);
    assert!(seq.steps.iter().all(|s| s.size <= peak));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn heuristic_cs_matches_recursion(seed in any::<u64>(), n in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_planar(n, &[2, 3, 4, 5, 8], &mut rng);
        let nested = random_nested(&(0..n).collect::<Vec<_>>(), &mut rng);
        let t = label_tree(&ContractionTree::from_nested(&nested), &g).unwrap();
        let seq = sequence(&t).unwrap();
        prop_assert_eq!(&seq.cs_alg1, &eq_cs(&g, &nested, true).0);
        check_sequence(&g, &seq, &t.metrics().ct);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimal_root_is_least_arc(seed in any::<u64>(), n in 3usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_planar(n, &[2, 3, 4, 7], &mut rng);
        let free = label_tree(&random_free_tree(n, &mut rng), &g).unwrap();
        let rooted = optimal_root(&free, &g).unwrap();
        let least = free.arc_label.iter().map(|c| c.exact.clone()).min().unwrap();
        prop_assert_eq!(rooted.metrics().ct, free.metrics().ct + &least);
        for a in 0..free.arc_label.len() {
            let other = label_tree(&free.tree.root_at(a).unwrap(), &g).unwrap();
            prop_assert!(rooted.metrics().ct <= other.metrics().ct);
        }
        let seq = sequence(&rooted).unwrap();
        check_sequence(&g, &seq, &rooted.metrics().ct);
        let back = ContractionSequence::from_json(&seq.to_json(&g), &g).unwrap();
        prop_assert_eq!(back, seq);
    }
}

#[test]
fn train_fixture_steps() {
    let g = train();
    let text = r#"{"children":[{"children":[{"children":[{"leaf":"A"},{"leaf":"B"}]},
        {"children":[{"leaf":"D"},{"leaf":"E"}]}]},{"children":[{"leaf":"C"},{"leaf":"F"}]}]}"#;
    let t = label_tree(&parse_tree(text, &g).unwrap(), &g).unwrap();
    let seq = sequence(&t).unwrap();
    let name = |s: &[usize]| s.iter().map(|&v| g.vertices[v].as_str()).collect::<String>();
    let results: BTreeSet<String> = seq.steps.iter().map(|s| name(&s.result)).collect();
    let want: BTreeSet<String> =
        ["AB", "DE", "CF", "ABDE", "ABCDEF"].iter().map(|s| s.to_string()).collect();
    assert_eq!(results, want);
    assert_eq!(seq.ct, BigUint::from(210u32));
    assert_eq!(name(&seq.steps.last().unwrap().result), "ABCDEF");
}
