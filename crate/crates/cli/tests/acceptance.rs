//! The ten acceptance criteria, one pass/fail line each.

use std::cell::RefCell;
use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratcon::carver::{decompose, verify_history};
use ratcon::ctree::{
    from_tree_decomposition, label_tree, to_tree_decomposition, ContractionTree, LabeledTree, Metrics, NestedTree,
    TreeBuilder,
};
use ratcon::netgen::{self, streams};
use ratcon::netgraph::planar_embedding;
use ratcon::oracle::{
    all_rooted_trees, brute_bs, brute_cw, contract_pair, count_free_trees, execute, full_contraction_reference,
    random_tensors,
};
use ratcon::ratcatcher::carving_width;
use ratcon::sequencer::{optimal_root, sequence};
use ratcon::{Edge, NetworkGraph};
use ratcon_cli::bench::{self, BenchConfig, BenchRecord};

thread_local! {
    /// Metrics of every tree built during the run, for the bounds criterion.
    static SEEN: RefCell<Vec<Metrics>> = const { RefCell::new(Vec::new()) };
}

fn record(m: &Metrics) {
    SEEN.with(|s| s.borrow_mut().push(m.clone()));
}

fn labeled(t: &ContractionTree, g: &NetworkGraph) -> LabeledTree {
    let l = label_tree(t, g).unwrap();
    record(&l.metrics());
    l
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn graph(n: usize, edges: &[(usize, usize, u64)]) -> NetworkGraph {
    let names = (0..n).map(|i| format!("v{i}")).collect();
    NetworkGraph::new(names, edges.iter().map(|&(u, v, w)| Edge { u, v, w }).collect()).unwrap()
}

fn grid(r: usize, c: usize, w: u64) -> NetworkGraph {
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

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut parts = n;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            parts -= 1;
        }
    }
    parts == 1
}

/// Stacked triangulation thinned by random edge removal, kept connected.
fn random_planar(n: usize, weights: &[u64], rng: &mut ChaCha8Rng) -> NetworkGraph {
    let mut edges = vec![(0, 1)];
    if n >= 3 {
        edges.extend([(1, 2), (0, 2)]);
        let mut faces = vec![[0, 1, 2], [0, 1, 2]];
        for v in 3..n {
            let [a, b, c] = faces.swap_remove(rng.gen_range(0..faces.len()));
            edges.extend([(a, v), (b, v), (c, v)]);
            faces.extend([[a, b, v], [b, c, v], [a, c, v]]);
        }
    }
    let drop = rng.gen_range(0.0..0.6);
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(rng);
    let mut keep = vec![true; edges.len()];
    for i in order {
        if rng.gen_bool(drop) {
            keep[i] = false;
            let rest: Vec<(usize, usize)> = (0..edges.len()).filter(|&j| keep[j]).map(|j| edges[j]).collect();
            if !is_connected(n, &rest) {
                keep[i] = true;
            }
        }
    }
    let triples: Vec<(usize, usize, u64)> = (0..edges.len())
        .filter(|&j| keep[j])
        .map(|j| (edges[j].0, edges[j].1, *weights.choose(rng).unwrap()))
        .collect();
    graph(n, &triples)
}

fn random_free_tree(n: usize, rng: &mut ChaCha8Rng) -> ContractionTree {
    let mut b = TreeBuilder::new();
    let mut live: Vec<usize> = (0..n).map(|v| b.leaf(v)).collect();
    while live.len() > 2 {
        let x = live.swap_remove(rng.gen_range(0..live.len()));
        let y = live.swap_remove(rng.gen_range(0..live.len()));
        live.push(b.join(x, y));
    }
    b.finish_free(live[0], live[1])
}

fn random_nested(leaves: &[usize], rng: &mut ChaCha8Rng) -> NestedTree {
    if leaves.len() == 1 {
        return NestedTree::Leaf(leaves[0]);
    }
    let mut v = leaves.to_vec();
    v.shuffle(rng);
    let k = rng.gen_range(1..v.len());
    NestedTree::node(random_nested(&v[..k], rng), random_nested(&v[k..], rng))
}

fn boundary(g: &NetworkGraph, set: u64) -> BigUint {
    g.edges.iter().filter(|e| (set >> e.u) & 1 != (set >> e.v) & 1).map(|e| BigUint::from(e.w)).product()
}

fn c1_ratcatcher_equivalence() -> Outcome {
    let mut corpus = Vec::new();
    for (r, c) in [(1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4)] {
        for w in [2, 4, 8] {
            corpus.push(grid(r, c, w));
        }
    }
    for n in 3..=7 {
        for w in [2, 4, 8] {
            corpus.push(graph(n, &(0..n).map(|i| (i, (i + 1) % n, w)).collect::<Vec<_>>()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let mut mixed = graph(n, &(0..n).map(|i| (i, (i + 1) % n, 2)).collect::<Vec<_>>());
        mixed.edges.iter_mut().for_each(|e| e.w = *[2, 4, 8].choose(&mut rng).unwrap());
        corpus.push(mixed);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for i in 0..240 {
        corpus.push(random_planar(2 + i % 6, &[2, 4, 8], &mut rng));
    }
    for g in &corpus {
        let emb = planar_embedding(g).map_err(|e| e.to_string())?;
        let r = carving_width(g, &emb).map_err(|e| e.to_string())?;
        let (bs, cw) = (brute_bs(g).unwrap(), brute_cw(g).unwrap());
        ensure(r.bs == bs && r.carw == cw, || format!("mismatch on {:?}: {} vs {}", g.edges, r.carw, cw))?;
    }
    Ok(format!("{} graphs, carving_width = brute_cw exactly", corpus.len()))
}

fn generated_graphs() -> Vec<NetworkGraph> {
    let mut out = Vec::new();
    for l in [3, 4] {
        let cfg = BenchConfig {
            ls: vec![l],
            samples: 50,
            runs: 1,
            seed: 2024,
            workers: 1,
            sigma_max: None,
            memory_cap_log2: 36.0,
            exact_budget: Duration::from_secs(1),
        };
        let gc = bench::gen_config(&cfg, l).unwrap();
        for i in 0..50 {
            let mut rng = netgen::sub_rng(bench::sample_seed(cfg.seed, i), streams::GENERATION, l as u64);
            let (g, _) = netgen::sample(&gc, &mut rng).unwrap();
            out.push(g.simplify().unwrap());
        }
    }
    out
}

fn c2_carver_width() -> Outcome {
    let graphs = generated_graphs();
    for (i, g) in graphs.iter().enumerate() {
        let emb = planar_embedding(g).map_err(|e| e.to_string())?;
        let cw = carving_width(g, &emb).map_err(|e| e.to_string())?;
        let target = cw.bs_u128().ok_or("width beyond the exact domain")?;
        let d = decompose(g, &emb, target, i as u64).map_err(|e| format!("graph {i}: {e}"))?;
        let m = labeled(&d.tree, g).metrics();
        ensure((m.bs_log2 - cw.carw).abs() <= 1e-9, || format!("graph {i}: tree {} vs carw {}", m.bs_log2, cw.carw))?;
        ensure(g.is_biconnected(), || format!("graph {i} is not biconnected"))?;
        let ok = verify_history(g, &d.history, target).map_err(|e| e.to_string())?;
        ensure(ok, || format!("graph {i}: a minor lost biconnectivity or width"))?;
    }
    Ok(format!("{} generated graphs (L=3,4), widths exact, all minors biconnected", graphs.len()))
}

fn c3_node_weight_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for i in 0..1000 {
        let n = rng.gen_range(3..=14);
        let g = random_planar(n, &[2, 3, 4, 5, 7, 16, 1 << 20], &mut rng);
        let t = labeled(&random_free_tree(n, &mut rng), &g);
        ensure(t.node_weight_identity_check(), || format!("tree {i} fails w(n)^2 = w(a)w(a')w(a'')"))?;
    }
    Ok("1000 random labeled trees, zero failures".into())
}

fn c4_bounds() -> Outcome {
    let seen = SEEN.with(|s| s.borrow().clone());
    let mut checked = 0;
    for m in seen.iter().filter(|m| m.n >= 3) {
        let k = BigUint::from(m.n as u64);
        let ok = m.bs <= m.bt
            && m.bt_log2 <= 1.5 * m.bs_log2 + 1e-9
            && &m.bt + BigUint::from(4u32) * (&k - 3u32) <= m.ct
            && m.ct <= (&k - 2u32) * &m.bt;
        ensure(ok, || format!("violated by n={} Bs={} Bt={} Ct={}", m.n, m.bs, m.bt, m.ct))?;
        checked += 1;
    }
    Ok(format!("{checked} free trees checked"))
}

fn c5_tree_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for i in 0..200 {
        let n = rng.gen_range(3..=12);
        let g = random_planar(n, &[2, 3, 4, 8], &mut rng);
        let t = labeled(&random_free_tree(n, &mut rng), &g);
        let td = to_tree_decomposition(&t);
        td.validate(&g).map_err(|e| format!("instance {i}: {e}"))?;
        let bt = t.metrics().bt;
        ensure(td.weighted_width(&g) == bt, || format!("instance {i}: width differs from Bt"))?;
        let back = labeled(&from_tree_decomposition(&td, &g).map_err(|e| e.to_string())?, &g);
        ensure(back.metrics().bt <= bt, || format!("instance {i}: round trip widened"))?;
    }
    Ok("200 instances valid, width = Bt, round trips non-increasing".into())
}

fn mask(t: &NestedTree) -> u64 {
    match t {
        NestedTree::Leaf(v) => 1 << v,
        NestedTree::Node(l, r) => mask(l) | mask(r),
    }
}

fn cs_recursion(g: &NetworkGraph, t: &NestedTree, root: bool) -> (BigUint, BigUint) {
    let cs = if root { BigUint::from(1u32) } else { boundary(g, mask(t)) };
    match t {
        NestedTree::Leaf(_) => (cs.clone(), cs),
        NestedTree::Node(l, r) => {
            let (bl, cl) = cs_recursion(g, l, false);
            let (br, cr) = cs_recursion(g, r, false);
            ((cl + &br).min(cr + &bl).max(cs.clone()), cs)
        }
    }
}

fn c6_heuristic_cs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for i in 0..1000 {
        let n = rng.gen_range(2..=12);
        let g = random_planar(n, &[2, 3, 4, 5, 8], &mut rng);
        let nested = random_nested(&(0..n).collect::<Vec<_>>(), &mut rng);
        let t = label_tree(&ContractionTree::from_nested(&nested), &g).unwrap();
        let seq = sequence(&t).map_err(|e| e.to_string())?;
        let want = cs_recursion(&g, &nested, true).0;
        ensure(seq.cs_alg1 == want, || format!("tree {i}: heuristic gives {}, recursion {want}", seq.cs_alg1))?;
    }
    let path = NetworkGraph::from_triples(&[("A", "B", 2), ("B", "C", 3)]);
    let free = labeled(&random_free_tree(3, &mut rng), &path);
    let seq = sequence(&optimal_root(&free, &path).unwrap()).unwrap();
    let pair = (seq.cs_alg1.clone(), seq.peak.clone());
    ensure(pair == (BigUint::from(4u32), BigUint::from(11u32)), || format!("path fixture gives {pair:?}"))?;
    Ok("1000 random rooted trees exact; path fixture CS = 4, peak = 11".into())
}

fn c7_numeric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = rng.gen_range(2..=6);
        let g = random_planar(n, &[2, 3], &mut rng);
        let tensors = random_tensors(&g, &mut rng);
        let reference = full_contraction_reference(&g, &tensors).map_err(|e| e.to_string())?;
        let a = labeled(&random_free_tree(n, &mut rng), &g);
        let b = labeled(&random_free_tree(n, &mut rng), &g);
        let sa = sequence(&optimal_root(&a, &g).unwrap()).unwrap();
        let arc = rng.gen_range(0..b.tree.arcs.len());
        let sb = sequence(&label_tree(&b.tree.root_at(arc).unwrap(), &g).unwrap()).unwrap();
        // Per-step multiply-adds against costs, by hand.
        let mut held: HashMap<Vec<usize>, _> = tensors.iter().cloned().enumerate().map(|(v, t)| (vec![v], t)).collect();
        for s in &sa.steps {
            let (x, y) = (held.remove(&s.l).unwrap(), held.remove(&s.r).unwrap());
            let (z, madds) = contract_pair(&x, &y).map_err(|e| e.to_string())?;
            ensure(BigUint::from(madds) == s.cost, || format!("network {i}: {madds} madds, cost {}", s.cost))?;
            held.insert(s.result.clone(), z);
        }
        let va = execute(&g, &tensors, &sa).map_err(|e| e.to_string())?;
        let vb = execute(&g, &tensors, &sb).map_err(|e| e.to_string())?;
        let rel = |v: Complex64| (v - reference).norm() / reference.norm().max(1e-300);
        worst = worst.max(rel(va)).max(rel(vb));
        ensure(rel(va) <= 1e-8 && rel(vb) <= 1e-8, || format!("network {i}: relative error {}", rel(va).max(rel(vb))))?;
    }
    Ok(format!("100 networks, worst relative error {worst:.1e}, costs = multiply-adds"))
}

fn ratcon_bench() -> &'static Result<Vec<BenchRecord>, String> {
    static RECORDS: std::sync::OnceLock<Result<Vec<BenchRecord>, String>> = std::sync::OnceLock::new();
    RECORDS.get_or_init(|| {
        let cfg = BenchConfig {
            ls: vec![4],
            samples: 20,
            runs: 100,
            seed: 1,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            sigma_max: None,
            memory_cap_log2: 36.0,
            exact_budget: Duration::from_secs(600),
        };
        bench::run(&cfg).map_err(|e| e.to_string())
    })
}

fn c8_exactness_floor() -> Outcome {
    let records = ratcon_bench().as_ref().map_err(|e| e.clone())?;
    let mut compared = 0;
    for r in records {
        ensure(r.error.is_none(), || format!("seed {:?}: {}", r.seed, r.error.clone().unwrap()))?;
        ensure(r.respects_floor(), || format!("seed {:?}: ratcon Ct below exact", r.seed))?;
        if let Some(rho) = r.rho {
            ensure(rho >= 1.0, || format!("seed {:?}: rho {rho}", r.seed))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} benchmarked graphs, zero violations"))
}

fn c9_rho_replication() -> Outcome {
    let records = ratcon_bench().as_ref().map_err(|e| e.clone())?;
    let rhos: Vec<f64> = records.iter().filter_map(|r| r.rho).collect();
    ensure(rhos.len() >= 20, || format!("only {} samples with an exact baseline", rhos.len()))?;
    let (median, mean) = (bench::median(&rhos), bench::mean(&rhos));
    let worst = rhos.iter().cloned().fold(1.0, f64::max);
    ensure(median <= 3.0, || format!("median rho {median}"))?;
    Ok(format!("L=4, N=100, {} samples: median rho {median:.4}, mean {mean:.4}, max {worst:.4}", rhos.len()))
}

fn c10_counting() -> Outcome {
    let want = [3u64, 15, 105, 945, 10395];
    let rooted: Vec<u64> = (3..=7).map(|n| all_rooted_trees(n).len() as u64).collect();
    let free_plus_one: Vec<u64> = (4..=8).map(count_free_trees).collect();
    let free: Vec<u64> = (3..=7).map(count_free_trees).collect();
    ensure(rooted == want, || format!("rooted enumeration gives {rooted:?}"))?;
    ensure(free_plus_one == want, || format!("free enumeration on n+1 leaves gives {free_plus_one:?}"))?;
    ensure(free == [1, 3, 15, 105, 945], || format!("free enumeration on n leaves gives {free:?}"))?;
    Ok(format!(
        "ctrees on n = 3..7 leaves with a root: {rooted:?}; without one: {free:?}, i.e. (2n-5)!!"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("ratcatcher equals brute-force carving width", c1_ratcatcher_equivalence),
        ("carver width guarantee", c2_carver_width),
        ("node-weight identity", c3_node_weight_identity),
        ("Bs/Bt/Ct bounds on every tree", c4_bounds),
        ("tree-decomposition bridge", c5_tree_decomposition),
        ("sequencing heuristic CS against the recursion", c6_heuristic_cs),
        ("numeric end-to-end", c7_numeric),
        ("exactness floor", c8_exactness_floor),
        ("desk-scale rho", c9_rho_replication),
        ("tree counts", c10_counting),
    ];
    // The bounds criterion reads trees built by every other one, so it runs last.
    let order = [0, 1, 2, 4, 5, 6, 7, 8, 9, 3];
    let mut results: Vec<Option<(Outcome, f64)>> = vec![None; criteria.len()];
    for &i in &order {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criteria[i].1)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        results[i] = Some((outcome, start.elapsed().as_secs_f64()));
    }
    let mut failed = 0;
    for (i, r) in results.into_iter().enumerate() {
        let (outcome, secs) = r.unwrap();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("acceptance {:>2} {tag}: {} ({detail}; {secs:.1}s)", i + 1, criteria[i].0);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
