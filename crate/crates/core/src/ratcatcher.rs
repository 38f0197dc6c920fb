//! Planar carving-width: the ratcatcher decision game and the binary search
//! built on it.
//!
//! The catcher stands on faces of the plane graph G (vertices of the dual),
//! the rat on vertices of G. Edge weights act as lengths, multiplied in the
//! exact domain and added in the log domain. For a threshold k:
//!
//! * edge e with dual x*y* is noisy from face p when d(p,x) + w(e) + d(p,y) < k;
//! * the rat lives in a component of G minus the edges noisy from the
//!   catcher's face;
//! * when the catcher crosses dual edge g = (p,q), edges on short closed dual
//!   walks through g (shorter than k) stay blocked, and the rat may run
//!   anywhere else inside its component before settling in a component seen
//!   from q;
//! * the rat is caught when its whole component lies on the catcher's face.
//!
//! The catcher wins iff some face has every rat component winning under the
//! least fixed point of "caught, or some move leads only to winning
//! states"; that happens exactly when carving width < k. Vertices whose
//! incident weight already reaches k decide the answer up front.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::netgraph::{Dsu, Embedding, NetworkGraph};

pub const DEFAULT_EPS: f64 = 1e-9;

/// Threshold of a decision query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// Is Bs(G) < t?
    Bs(u128),
    /// Is carw(G) = log2 Bs(G) < k? Values within `eps` of k count as equal.
    Log2 { k: f64, eps: f64 },
}

/// Path length domain of the game.
pub trait Load: Copy + PartialOrd + std::fmt::Debug {
    const ZERO: Self;
    const INF: Self;
    fn add(self, other: Self) -> Self;
}

impl Load for u128 {
    const ZERO: u128 = 1;
    const INF: u128 = u128::MAX;
    fn add(self, other: u128) -> u128 {
        self.saturating_mul(other)
    }
}

impl Load for f64 {
    const ZERO: f64 = 0.0;
    const INF: f64 = f64::INFINITY;
    fn add(self, other: f64) -> f64 {
        self + other
    }
}

#[derive(PartialEq)]
struct Entry<W>(W, usize);

impl<W: PartialOrd> Eq for Entry<W> {}

impl<W: PartialOrd> PartialOrd for Entry<W> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<W: PartialOrd> Ord for Entry<W> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}

/// One prepared plane graph; `decide` can be called for many thresholds.
#[derive(Clone, Debug)]
pub struct Game<W: Load> {
    nq: usize,
    np: usize,
    /// (face, face, vertex, vertex, weight) per edge.
    edges: Vec<(usize, usize, usize, usize, W)>,
    dist: Vec<Vec<W>>,
    on_face: Vec<FixedBitSet>,
    degree: Vec<W>,
}

impl<W: Load> Game<W> {
    pub fn new(g: &NetworkGraph, emb: &Embedding, weight: impl Fn(u64) -> W) -> Result<Game<W>> {
        if emb.rotation.len() != g.n() || emb.edge_faces.len() != g.m() {
            return Err(Error::NotPlanarEmbedding("embedding built for another graph".into()));
        }
        let np = emb.num_faces();
        let nq = g.n();
        let mut edges = Vec::with_capacity(g.m());
        let mut degree = vec![W::ZERO; nq];
        let mut dual: Vec<Vec<(usize, W)>> = vec![Vec::new(); np];
        for (i, e) in g.edges.iter().enumerate() {
            if e.is_loop() {
                return Err(Error::NotPlanarEmbedding("loop in graph".into()));
            }
            let [p, q] = emb.edge_faces[i];
            let w = weight(e.w);
            edges.push((p, q, e.u, e.v, w));
            degree[e.u] = degree[e.u].add(w);
            degree[e.v] = degree[e.v].add(w);
            dual[p].push((q, w));
            if p != q {
                dual[q].push((p, w));
            }
        }
        let dist = (0..np).map(|s| dijkstra(&dual, s)).collect();
        let mut on_face = vec![FixedBitSet::with_capacity(nq); np];
        for (f, vs) in emb.face_vertices(g).into_iter().enumerate() {
            for v in vs {
                on_face[f].insert(v);
            }
        }
        Ok(Game { nq, np, edges, dist, on_face, degree })
    }

    fn components(&self, blocked: &FixedBitSet) -> (Vec<usize>, usize) {
        let mut dsu = Dsu::new(self.nq);
        for (i, &(_, _, u, v, _)) in self.edges.iter().enumerate() {
            if !blocked.contains(i) {
                dsu.union(u, v);
            }
        }
        let mut label = vec![usize::MAX; self.nq];
        let mut id = vec![0; self.nq];
        let mut count = 0;
        for x in 0..self.nq {
            let r = dsu.find(x);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            id[x] = label[r];
        }
        (id, count)
    }

    /// True iff the carving width is below `k` (strictly).
    pub fn decide(&self, k: W) -> bool {
        match self.nq {
            0 | 1 => return W::ZERO < k,
            2 => {
                let w = self.edges.iter().fold(W::ZERO, |acc, e| acc.add(e.4));
                return w < k;
            }
            _ => {}
        }
        if self.degree.iter().any(|&d| !(d < k)) {
            return false;
        }
        let m = self.edges.len();
        let d = &self.dist;

        // Rat territories seen from each face.
        let mut comp = Vec::with_capacity(self.np);
        let mut offset = Vec::with_capacity(self.np + 1);
        let mut total = 0;
        for p in 0..self.np {
            let mut noisy = FixedBitSet::with_capacity(m);
            for (i, &(x, y, _, _, w)) in self.edges.iter().enumerate() {
                if d[p][x].add(w).add(d[p][y]) < k {
                    noisy.insert(i);
                }
            }
            let (id, count) = self.components(&noisy);
            offset.push(total);
            total += count;
            comp.push((id, count));
        }
        offset.push(total);

        let mut win = vec![false; total];
        for p in 0..self.np {
            let (id, count) = &comp[p];
            let mut inside = vec![true; *count];
            for x in 0..self.nq {
                if !self.on_face[p].contains(x) {
                    inside[id[x]] = false;
                }
            }
            for (c, ok) in inside.into_iter().enumerate() {
                win[offset[p] + c] = ok;
            }
        }

        // Moves: for every state, the list of target-state sets, one per move.
        let mut moves: Vec<Vec<Vec<usize>>> = vec![Vec::new(); total];
        for &(p, q, _, _, wg) in &self.edges {
            if p == q {
                continue;
            }
            let mut blocked = FixedBitSet::with_capacity(m);
            for (i, &(x, y, _, _, w)) in self.edges.iter().enumerate() {
                let via = {
                    let a = d[q][x].add(d[y][p]);
                    let b = d[q][y].add(d[x][p]);
                    if a < b {
                        a
                    } else {
                        b
                    }
                };
                if wg.add(w).add(via) < k {
                    blocked.insert(i);
                }
            }
            let (reach, nreach) = self.components(&blocked);
            for (from, to) in [(p, q), (q, p)] {
                let (fid, fcount) = &comp[from];
                let (tid, _) = &comp[to];
                // Reach components touched by each source state, then target
                // states inside each reach component.
                let mut touched = vec![FixedBitSet::with_capacity(nreach); *fcount];
                let mut targets_of_reach = vec![Vec::new(); nreach];
                for x in 0..self.nq {
                    touched[fid[x]].insert(reach[x]);
                    targets_of_reach[reach[x]].push(offset[to] + tid[x]);
                }
                for t in targets_of_reach.iter_mut() {
                    t.sort_unstable();
                    t.dedup();
                }
                for c in 0..*fcount {
                    let mut targets: Vec<usize> = touched[c]
                        .ones()
                        .flat_map(|r| targets_of_reach[r].iter().copied())
                        .collect();
                    targets.sort_unstable();
                    targets.dedup();
                    moves[offset[from] + c].push(targets);
                }
            }
        }

        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..total {
                if !win[s] && moves[s].iter().any(|t| t.iter().all(|&x| win[x])) {
                    win[s] = true;
                    changed = true;
                }
            }
        }
        (0..self.np).any(|p| (offset[p]..offset[p + 1]).all(|s| win[s]))
    }
}

fn dijkstra<W: Load>(adj: &[Vec<(usize, W)>], s: usize) -> Vec<W> {
    let mut dist = vec![W::INF; adj.len()];
    dist[s] = W::ZERO;
    let mut heap = BinaryHeap::from([Entry(W::ZERO, s)]);
    while let Some(Entry(dd, x)) = heap.pop() {
        if dd > dist[x] {
            continue;
        }
        for &(y, w) in &adj[x] {
            let nd = dd.add(w);
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Entry(nd, y));
            }
        }
    }
    dist
}

/// Exact-domain game: lengths are saturating products of bond dimensions.
pub fn exact_game(g: &NetworkGraph, emb: &Embedding) -> Result<Game<u128>> {
    Game::new(g, emb, |w| w as u128)
}

/// Log-domain game: lengths are sums of log2 bond dimensions.
pub fn log_game(g: &NetworkGraph, emb: &Embedding) -> Result<Game<f64>> {
    Game::new(g, emb, |w| (w as f64).log2())
}

/// Smallest integer t with t >= 2^(k - eps), when it fits the exact domain.
fn exact_threshold(k: f64, eps: f64) -> Option<u128> {
    let x = k - eps;
    if x < 0.0 {
        return Some(1);
    }
    if x >= 126.0 {
        return None;
    }
    Some(x.exp2().ceil() as u128)
}

/// True iff carw(g) < k (or Bs(g) < t).
pub fn decide(g: &NetworkGraph, emb: &Embedding, k: Threshold) -> Result<bool> {
    match k {
        Threshold::Bs(t) => Ok(exact_game(g, emb)?.decide(t)),
        Threshold::Log2 { k, eps } => match exact_threshold(k, eps) {
            Some(t) => Ok(exact_game(g, emb)?.decide(t)),
            None => Ok(log_game(g, emb)?.decide(k - eps)),
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarvingWidthResult {
    /// log2 of the space bottleneck.
    pub carw: f64,
    pub bs: BigUint,
    /// False when the search had to fall back to the log domain; `bs` is then
    /// rounded from `carw` and accurate to within `error_bound` in log2.
    pub exact: bool,
    pub error_bound: f64,
    pub decision_calls: usize,
    pub elapsed: f64,
}

/// Exact Bs(g) by doubling k from the heaviest edge, then bisecting the
/// integer interval [2^(k/2), 2^k).
pub fn carving_width(g: &NetworkGraph, emb: &Embedding) -> Result<CarvingWidthResult> {
    carving_width_eps(g, emb, DEFAULT_EPS)
}

pub fn carving_width_eps(g: &NetworkGraph, emb: &Embedding, eps: f64) -> Result<CarvingWidthResult> {
    let start = Instant::now();
    let game = exact_game(g, emb)?;
    let mut calls = 0;
    let mut ask = |t: u128| {
        calls += 1;
        game.decide(t)
    };
    let finish = |bs: u128, calls: usize| CarvingWidthResult {
        carw: (bs as f64).log2(),
        bs: BigUint::from(bs),
        exact: true,
        error_bound: 0.0,
        decision_calls: calls,
        elapsed: start.elapsed().as_secs_f64(),
    };
    if g.n() <= 1 {
        return Ok(finish(1, 0));
    }
    if g.n() == 2 {
        let w = g.edges.iter().fold(1u128, |a, e| a.saturating_mul(e.w as u128));
        if w < u128::MAX {
            return Ok(finish(w, 0));
        }
    }
    let mut lo = (g.max_weight() as u128).max(2);
    let mut hi = lo;
    let mut found = false;
    loop {
        if ask(hi) {
            found = true;
            break;
        }
        if hi == u128::MAX {
            break;
        }
        lo = hi;
        hi = hi.saturating_mul(hi);
    }
    if found {
        // Bs in [lo, hi - 1]; lo only bounds from below when decide(lo) failed.
        let mut a = if lo < hi { lo } else { 1 };
        let mut b = hi - 1;
        while a < b {
            let mid = a + (b - a) / 2;
            if ask(mid + 1) {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        return Ok(finish(a, calls));
    }
    // Beyond the exact domain: bisect carw itself in log2.
    let game = log_game(g, emb)?;
    let mut lo = 126.0f64;
    let mut hi = 252.0f64;
    while !game.decide(hi - eps) {
        calls += 1;
        lo = hi;
        hi *= 2.0;
    }
    calls += 1;
    while hi - lo > eps * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        calls += 1;
        if game.decide(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let bs = BigUint::from(2u32).pow(hi.floor() as u32)
        * BigUint::from(((hi - hi.floor()).exp2() * 2f64.powi(52)).round() as u64)
        / BigUint::from(1u64 << 52);
    Ok(CarvingWidthResult {
        carw: hi,
        bs,
        exact: false,
        error_bound: hi - lo,
        decision_calls: calls,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

impl CarvingWidthResult {
    /// Bs as u128 when it fits.
    pub fn bs_u128(&self) -> Option<u128> {
        self.bs.to_u128()
    }

    /// Whether carw is an integer, i.e. Bs is an exact power of two.
    pub fn is_pow2(&self) -> bool {
        self.exact && self.bs.count_ones() == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::planar_embedding;

    fn cycle(k: usize, w: u64) -> NetworkGraph {
        let ids = (0..k).map(|i| format!("v{i}")).collect();
        let edges = (0..k).map(|i| crate::Edge { u: i, v: (i + 1) % k, w }).collect();
        NetworkGraph::new(ids, edges).unwrap()
    }

    fn width(g: &NetworkGraph) -> CarvingWidthResult {
        carving_width(g, &planar_embedding(g).unwrap()).unwrap()
    }

    #[test]
    fn c4_thresholds() {
        let g = cycle(4, 2);
        let emb = planar_embedding(&g).unwrap();
        let log = |k: f64| decide(&g, &emb, Threshold::Log2 { k, eps: DEFAULT_EPS }).unwrap();
        assert!(log(3.0));
        assert!(!log(2.0));
        let r = width(&g);
        assert_eq!(r.carw, 2.0);
        assert_eq!(r.bs, BigUint::from(4u32));
    }

    #[test]
    fn single_edge() {
        let g = NetworkGraph::from_triples(&[("A", "B", 8)]);
        let emb = planar_embedding(&g).unwrap();
        let log = |k: f64| decide(&g, &emb, Threshold::Log2 { k, eps: DEFAULT_EPS }).unwrap();
        assert!(!log(3.0));
        assert!(log(3.01));
        assert_eq!(width(&g).carw, 3.0);
    }

    #[test]
    fn path_and_triangle() {
        let p = NetworkGraph::from_triples(&[("A", "B", 2), ("B", "C", 3)]);
        assert_eq!(width(&p).bs, BigUint::from(6u32));
        let t = NetworkGraph::from_triples(&[("A", "B", 2), ("B", "C", 3), ("A", "C", 4)]);
        assert_eq!(width(&t).bs, BigUint::from(12u32));
    }

    #[test]
    fn log_domain_agrees_on_small_cases() {
        let g = cycle(5, 3);
        let emb = planar_embedding(&g).unwrap();
        let exact = exact_game(&g, &emb).unwrap();
        let log = log_game(&g, &emb).unwrap();
        for t in 2u128..200 {
            let k = (t as f64).log2();
            assert_eq!(exact.decide(t), log.decide(k - 1e-9), "t = {t}");
        }
    }

    #[test]
    fn call_count_is_logarithmic() {
        let g = cycle(6, 16);
        let r = width(&g);
        assert_eq!(r.bs, BigUint::from(256u32));
        assert!(r.decision_calls <= 2 * 8 + 4, "{}", r.decision_calls);
    }
}
