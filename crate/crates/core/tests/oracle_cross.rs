mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratcon::ctree::{label_tree, ContractionTree};
use ratcon::oracle::{all_rooted_trees, exact_min_ct};

#[test]
fn dp_equals_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..60 {
        let n = rng.gen_range(2..=7);
        let g = random_planar(n, &[2, 3, 4, 5, 7, 8], &mut rng);
        let best = all_rooted_trees(n)
            .iter()
            .map(|t| label_tree(&ContractionTree::from_nested(t), &g).unwrap().metrics().ct)
            .min()
            .unwrap();
        let dp = exact_min_ct(&g).unwrap();
        assert_eq!(dp.ct, best);
        let witness = label_tree(&dp.tree, &g).unwrap();
        assert_eq!(witness.metrics().ct, best);
    }
}

#[test]
fn dp_on_a_grid_is_below_any_random_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let g = grid(3, 4, 3);
    let dp = exact_min_ct(&g).unwrap();
    for _ in 0..200 {
        let t = random_nested(&(0..g.n()).collect::<Vec<_>>(), &mut rng);
        assert!(label_tree(&ContractionTree::from_nested(&t), &g).unwrap().metrics().ct >= dp.ct);
    }
}
