//! Optimal carving decompositions by repeated contraction of eligible edges,
//! with randomized restarts.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ctree::{label_tree, ContractionTree, LabeledTree, Metrics, TreeBuilder};
use crate::error::{Error, Result};
use crate::netgraph::{Embedding, NetworkGraph};
use crate::ratcatcher::exact_game;

/// One contraction of the history: the contracted edge as the ids of its
/// endpoints in the minor it was taken from, and the resulting minor.
#[derive(Clone, Debug)]
pub struct HistoryStep {
    pub edge: (String, String),
    pub minor: NetworkGraph,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub tree: ContractionTree,
    pub history: Vec<HistoryStep>,
}

/// Largest tensor any tree must hold: every leaf arc carries all edges of its vertex.
fn max_degree_weight(g: &NetworkGraph) -> u128 {
    (0..g.n()).map(|v| g.degree_weight(v)).max().unwrap_or(1)
}

/// Whether contracting `e` in `minor` keeps an optimal decomposition within
/// reach: w(e) <= Bs(minor) (and <= target, which bounds Bs(minor) on any
/// valid run), the minor stays biconnected (checked only while it is), and
/// Bs(minor/e) <= target.
pub fn eligible(minor: &NetworkGraph, emb: &Embedding, e: usize, target: u128) -> Result<bool> {
    let w = minor.edges.get(e).ok_or_else(|| Error::NoSuchEdge(e.to_string()))?.w as u128;
    if w > target || (w > max_degree_weight(minor) && exact_game(minor, emb)?.decide(w)) {
        return Ok(false);
    }
    let (next, map) = minor.contract_edge(e)?;
    if minor.is_biconnected() && !next.is_biconnected() {
        return Ok(false);
    }
    let next_emb = emb.contract(minor, e, &next, &map)?;
    Ok(exact_game(&next, &next_emb)?.decide(target.saturating_add(1)))
}

/// Builds a free tree of width exactly `target` (which must be Bs(g)),
/// choosing uniformly among eligible edges with a generator seeded by `seed`.
pub fn decompose(g: &NetworkGraph, emb: &Embedding, target: u128, seed: u64) -> Result<Decomposition> {
    decompose_with(g, emb, target, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn decompose_with(g: &NetworkGraph, emb: &Embedding, target: u128, rng: &mut ChaCha8Rng) -> Result<Decomposition> {
    let n = g.n();
    if n < 2 {
        return Err(Error::BadShape("a decomposition needs at least two vertices".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut builder = TreeBuilder::new();
    let mut node_of: Vec<usize> = (0..n).map(|v| builder.leaf(v)).collect();
    let mut minor = g.clone();
    let mut minor_emb = emb.clone();
    let mut history = Vec::with_capacity(n.saturating_sub(2));
    while minor.n() > 2 {
        let mut order: Vec<usize> = (0..minor.m()).collect();
        order.shuffle(rng);
        let mut chosen = None;
        for e in order {
            if eligible(&minor, &minor_emb, e, target)? {
                chosen = Some(e);
                break;
            }
        }
        let e = chosen.ok_or_else(|| Error::NoEligibleEdge {
            vertices: minor.n(),
            target: target.to_string(),
        })?;
        let (next, map) = minor.contract_edge(e)?;
        let next_emb = minor_emb.contract(&minor, e, &next, &map)?;
        let edge = minor.edges[e];
        let joined = builder.join(node_of[edge.u], node_of[edge.v]);
        let mut next_nodes = vec![0; next.n()];
        for v in 0..minor.n() {
            next_nodes[map.vertex[v]] = node_of[v];
        }
        next_nodes[map.vertex[edge.u]] = joined;
        node_of = next_nodes;
        history.push(HistoryStep {
            edge: (minor.vertices[edge.u].clone(), minor.vertices[edge.v].clone()),
            minor: next.clone(),
        });
        minor = next;
        minor_emb = next_emb;
    }
    let tree = builder.finish_free(node_of[0], node_of[1]);
    Ok(Decomposition { tree, history })
}

/// Re-checks a history: every minor is biconnected (when at least three
/// vertices) and has width at most `target`; the last minor has two vertices.
pub fn verify_history(g: &NetworkGraph, history: &[HistoryStep], target: u128) -> Result<bool> {
    let mut ok = history.last().map_or(g.n() <= 2, |s| s.minor.n() == 2);
    let biconnected_start = g.is_biconnected();
    for step in history {
        let m = &step.minor;
        if biconnected_start && m.n() >= 3 && !m.is_biconnected() {
            ok = false;
        }
        let emb = crate::netgraph::planar_embedding(m)?;
        ok &= exact_game(m, &emb)?.decide(target.saturating_add(1));
    }
    Ok(ok)
}

#[derive(Clone, Debug)]
pub struct BestOf {
    pub tree: LabeledTree,
    pub metrics: Metrics,
    /// Index of the winning run.
    pub run: usize,
    /// Ct of every run, in run order.
    pub run_cts: Vec<BigUint>,
}

/// Runs `decompose` `runs` times on `workers` threads and keeps the tree of
/// least Ct (then least Bt, then earliest run). Run i draws from stream i of
/// the generator seeded by `seed`, so run 0 is `decompose(.., seed)`.
pub fn best_of(
    g: &NetworkGraph,
    emb: &Embedding,
    target: u128,
    runs: usize,
    seed: u64,
    workers: usize,
) -> Result<BestOf> {
    if runs == 0 {
        return Err(Error::BadShape("at least one run is required".into()));
    }
    let one = |i: usize| -> Result<(LabeledTree, Metrics)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let d = decompose_with(g, emb, target, &mut rng)?;
        let t = label_tree(&d.tree, g)?;
        let m = t.metrics();
        Ok((t, m))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let results: Vec<(LabeledTree, Metrics)> =
        pool.install(|| (0..runs).into_par_iter().map(one).collect::<Result<Vec<_>>>())?;
    let run_cts = results.iter().map(|(_, m)| m.ct.clone()).collect();
    let run = (0..runs)
        .min_by(|&a, &b| {
            let (ma, mb) = (&results[a].1, &results[b].1);
            ma.ct.cmp(&mb.ct).then(ma.bt.cmp(&mb.bt)).then(a.cmp(&b))
        })
        .unwrap();
    let (tree, metrics) = results.into_iter().nth(run).unwrap();
    Ok(BestOf { tree, metrics, run, run_cts })
}
