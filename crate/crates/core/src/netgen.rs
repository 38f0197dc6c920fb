//! L x L grid networks with lognormal bond dimensions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ctree::big_log2;
use crate::error::{Error, Result};
use crate::netgraph::{Edge, Embedding, NetworkGraph};
use crate::ratcatcher::{carving_width, exact_game};

/// Stream ids for the independent random sequences drawn from one seed.
pub mod streams {
    pub const GENERATION: u64 = 1;
    pub const SIGMA_SEARCH: u64 = 2;
    pub const CARVER: u64 = 3;
    pub const NUMERIC: u64 = 4;
}

/// Generator for draw `index` of stream `stream` under `seed`.
pub fn sub_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub l: usize,
    /// Natural-log mean of the bond dimensions.
    pub mu_log: f64,
    pub sigma_max: f64,
    pub memory_cap_log2: f64,
    pub max_rejects: usize,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(l: usize, mu_log: f64, sigma_max: f64) -> GenConfig {
        GenConfig { l, mu_log, sigma_max, memory_cap_log2: 36.0, max_rejects: 10_000, seed: 0 }
    }

    fn check(&self) -> Result<()> {
        if self.l < 2 || !(self.sigma_max >= 0.0) || !(self.memory_cap_log2 > 0.0) {
            return Err(Error::BadShape(format!(
                "need L >= 2, sigma_max >= 0, memory cap > 0 (got {}, {}, {})",
                self.l, self.sigma_max, self.memory_cap_log2
            )));
        }
        Ok(())
    }
}

/// L x L grid with unit weights, vertices "r{i}c{j}" in row-major order,
/// carrying its straight-line rotation system.
pub fn grid(l: usize) -> (NetworkGraph, Embedding) {
    assert!(l >= 2);
    let id = |i: usize, j: usize| i * l + j;
    let vertices = (0..l * l).map(|v| format!("r{}c{}", v / l, v % l)).collect();
    let mut edges = Vec::new();
    for i in 0..l {
        for j in 0..l {
            if j + 1 < l {
                edges.push(Edge { u: id(i, j), v: id(i, j + 1), w: 1 });
            }
            if i + 1 < l {
                edges.push(Edge { u: id(i, j), v: id(i + 1, j), w: 1 });
            }
        }
    }
    let mut g = NetworkGraph::new(vertices, edges).expect("grid is well formed");
    // Counter-clockwise: east, north, west, south (rows grow southward).
    let mut rotation = vec![Vec::new(); l * l];
    for i in 0..l {
        for j in 0..l {
            let v = id(i, j);
            let steps: [(isize, isize); 4] = [(0, 1), (-1, 0), (0, -1), (1, 0)];
            for (di, dj) in steps {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a >= 0 && b >= 0 && (a as usize) < l && (b as usize) < l {
                    rotation[v].push(g.find_edge(v, id(a as usize, b as usize)).unwrap());
                }
            }
        }
    }
    let emb = Embedding::from_rotation(&g, rotation.clone()).expect("grid rotation is planar");
    g.rotation = Some(rotation);
    (g, emb)
}

/// Copy of `g` with every weight set to `d`.
pub fn uniform(g: &NetworkGraph, d: u64) -> NetworkGraph {
    let mut out = g.clone();
    out.edges.iter_mut().for_each(|e| e.w = d);
    out
}

/// Draws w = max(1, round(exp(N(mu, s)))) per edge, with s ~ U(0, sigma_max)
/// drawn independently for every edge.
pub fn lognormal_weights(g: &NetworkGraph, cfg: &GenConfig, rng: &mut impl Rng) -> NetworkGraph {
    let mut out = g.clone();
    for e in &mut out.edges {
        let sigma = rng.gen::<f64>() * cfg.sigma_max;
        let x = Normal::new(cfg.mu_log, sigma).expect("finite sigma").sample(rng);
        e.w = (x.exp().round() as u64).max(1);
    }
    out
}

/// Largest integer d with log2 Bs(uniform-d copy of shape) <= cap.
pub fn calibrate_uniform(shape: &NetworkGraph, emb: &Embedding, cap_log2: f64) -> Result<u64> {
    let fits = |d: u64| -> Result<bool> {
        let r = carving_width(&uniform(shape, d), emb)?;
        Ok(big_log2(&r.bs) <= cap_log2 + 1e-9)
    };
    if !fits(1)? {
        return Ok(0);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while fits(hi)? {
        lo = hi;
        if hi >= u64::MAX / 2 {
            return Ok(hi);
        }
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// ln d for the largest uniform bond dimension d keeping the L x L grid
/// within the memory cap.
pub fn calibrate_mu(l: usize, cap_log2: f64) -> Result<f64> {
    let (g, emb) = grid(l);
    Ok((calibrate_uniform(&g, &emb, cap_log2)? as f64).ln())
}

/// Why a draw was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    OverMemory,
    NotBiconnected,
}

/// Applies both rejection rules to a raw weighted grid.
pub fn judge(g: &NetworkGraph, cap_log2: f64) -> Result<Verdict> {
    let strong = NetworkGraph {
        edges: g.edges.iter().copied().filter(|e| e.w > 1).collect(),
        rotation: None,
        ..g.clone()
    };
    if !strong.is_biconnected() {
        return Ok(Verdict::NotBiconnected);
    }
    let simple = g.simplify()?;
    let emb = crate::netgraph::planar_embedding(&simple)?;
    let fits = if cap_log2 < 126.0 {
        let t = cap_log2.exp2().floor() as u128 + 1;
        exact_game(&simple, &emb)?.decide(t)
    } else {
        crate::ratcatcher::log_game(&simple, &emb)?.decide(cap_log2 + 1e-9)
    };
    Ok(if fits { Verdict::Accepted } else { Verdict::OverMemory })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectStats {
    pub draws: usize,
    pub over_memory: usize,
    pub not_biconnected: usize,
}

/// Draws weighted grids until one passes both rejection rules.
pub fn sample(cfg: &GenConfig, rng: &mut impl Rng) -> Result<(NetworkGraph, RejectStats)> {
    cfg.check()?;
    let (shape, _) = grid(cfg.l);
    let mut stats = RejectStats::default();
    while stats.draws < cfg.max_rejects.max(1) {
        stats.draws += 1;
        let g = lognormal_weights(&shape, cfg, rng);
        match judge(&g, cfg.memory_cap_log2)? {
            Verdict::Accepted => return Ok((g, stats)),
            Verdict::OverMemory => stats.over_memory += 1,
            Verdict::NotBiconnected => stats.not_biconnected += 1,
        }
    }
    Err(Error::RejectionBudgetExhausted(stats.draws))
}

/// Fraction of `trials` raw draws that pass the rejection rules.
pub fn acceptance_rate(cfg: &GenConfig, trials: usize, rng: &mut impl Rng) -> Result<f64> {
    let (shape, _) = grid(cfg.l);
    let mut ok = 0;
    for _ in 0..trials {
        if judge(&lognormal_weights(&shape, cfg, rng), cfg.memory_cap_log2)? == Verdict::Accepted {
            ok += 1;
        }
    }
    Ok(ok as f64 / trials.max(1) as f64)
}

/// Largest sigma_max on the grid 0, 0.25, ..., `top` whose Monte-Carlo
/// acceptance rate is at least `min_rate`.
pub fn auto_sigma_max(
    cfg: &GenConfig,
    min_rate: f64,
    trials: usize,
    top: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    let mut best = 0.0;
    let steps = (top / 0.25).round() as usize;
    for i in 1..=steps {
        let sigma = i as f64 * 0.25;
        let probe = GenConfig { sigma_max: sigma, ..cfg.clone() };
        if acceptance_rate(&probe, trials, rng)? >= min_rate {
            best = sigma;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleRecord {
    pub file: String,
    pub index: usize,
    pub draws: usize,
    pub over_memory: usize,
    pub not_biconnected: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: GenConfig,
    pub uniform_d: u64,
    pub sigma_max_auto: bool,
    pub samples: Vec<SampleRecord>,
    pub total_draws: usize,
    pub acceptance_rate: f64,
}
