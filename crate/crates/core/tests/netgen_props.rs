use proptest::prelude::*;
use rand::RngCore;
use ratcon::ctree::big_log2;
use ratcon::netgen::{self, calibrate_uniform, grid, judge, sample, streams, sub_rng, uniform, GenConfig, Verdict};
use ratcon::netgraph::planar_embedding;
use ratcon::ratcatcher::carving_width;
use ratcon::NetworkGraph;

fn log2_bs(g: &NetworkGraph) -> f64 {
    let s = g.simplify().unwrap();
    let emb = planar_embedding(&s).unwrap();
    big_log2(&carving_width(&s, &emb).unwrap().bs)
}

#[test]
fn calibrated_dimensions() {
    // Frozen from the ratcatcher on uniform grids under a 2^36 cap.
    let want = [(2, 262_144), (3, 512), (4, 512), (5, 64)];
    for (l, d) in want {
        let (g, emb) = grid(l);
        assert_eq!(calibrate_uniform(&g, &emb, 36.0).unwrap(), d, "L={l}");
        assert!(log2_bs(&uniform(&g, d)) <= 36.0);
        assert!(log2_bs(&uniform(&g, d + 1)) > 36.0);
    }
}

#[test]
fn streams_are_distinct_and_replayable() {
    let draw = |s, k, i| sub_rng(s, k, i).next_u64();
    assert_eq!(draw(5, streams::GENERATION, 3), draw(5, streams::GENERATION, 3));
    assert_ne!(draw(5, streams::GENERATION, 3), draw(5, streams::CARVER, 3));
    assert_ne!(draw(5, streams::GENERATION, 3), draw(5, streams::GENERATION, 4));
    assert_ne!(draw(5, streams::GENERATION, 3), draw(6, streams::GENERATION, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn accepted_samples_obey_both_rules(seed in any::<u64>(), l in 2usize..5, sigma in 0.0f64..3.0) {
        let mu = netgen::calibrate_mu(l, 36.0).unwrap();
        let cfg = GenConfig::new(l, mu, sigma);
        let (g, stats) = sample(&cfg, &mut sub_rng(seed, streams::GENERATION, 0)).unwrap();
        let (again, stats2) = sample(&cfg, &mut sub_rng(seed, streams::GENERATION, 0)).unwrap();
        prop_assert_eq!(&g.edges, &again.edges);
        prop_assert_eq!(stats.clone(), stats2);
        prop_assert_eq!(stats.draws, 1 + stats.over_memory + stats.not_biconnected);
        prop_assert!(log2_bs(&g) <= 36.0);
        let strong = NetworkGraph::new(
            g.vertices.clone(),
            g.edges.iter().copied().filter(|e| e.w > 1).collect(),
        ).unwrap();
        prop_assert!(strong.is_biconnected());
        prop_assert_eq!(g.n(), l * l);
    }
}

#[test]
fn judge_verdicts() {
    let (shape, _) = grid(3);
    assert_eq!(judge(&uniform(&shape, 512), 36.0).unwrap(), Verdict::Accepted);
    assert_eq!(judge(&uniform(&shape, 513), 36.0).unwrap(), Verdict::OverMemory);
    let mut cut = uniform(&shape, 4);
    // Unit weights on both edges at a corner leave it hanging.
    for e in &mut cut.edges {
        if e.u == 0 {
            e.w = 1;
        }
    }
    assert_eq!(judge(&cut, 36.0).unwrap(), Verdict::NotBiconnected);
}
