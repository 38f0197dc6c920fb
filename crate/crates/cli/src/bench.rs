//! Desk-scale replication harness: ratcon against the exact subset DP.

use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::RngCore;
use ratcon::carver::best_of;
use ratcon::netgen::{self, streams, GenConfig};
use ratcon::netgraph::planar_embedding;
use ratcon::oracle::{exact_min_ct_budget, MAX_DP_N};
use ratcon::ratcatcher::carving_width;
use ratcon::sequencer::optimal_root;
use ratcon::NetworkGraph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    /// "sample", or "mean" / "median" / "stddev" for aggregate rows.
    pub kind: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub carw: Option<f64>,
    pub cw_time_s: Option<f64>,
    pub avg_ec_time_s: Option<f64>,
    pub ratcon_time_s: Option<f64>,
    pub ratcon_ct: Option<String>,
    pub exact_ct: Option<String>,
    pub exact_time_s: Option<f64>,
    pub rho: Option<f64>,
    pub error: Option<String>,
}

impl BenchRecord {
    fn empty(kind: &str, l: usize) -> BenchRecord {
        BenchRecord {
            kind: kind.into(),
            l,
            seed: None,
            n: None,
            carw: None,
            cw_time_s: None,
            avg_ec_time_s: None,
            ratcon_time_s: None,
            ratcon_ct: None,
            exact_ct: None,
            exact_time_s: None,
            rho: None,
            error: None,
        }
    }

    /// Exact ratio check: ratcon Ct >= exact Ct whenever both are present.
    pub fn respects_floor(&self) -> bool {
        match (&self.ratcon_ct, &self.exact_ct) {
            (Some(r), Some(e)) => r.parse::<BigUint>().unwrap() >= e.parse::<BigUint>().unwrap(),
            _ => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub ls: Vec<usize>,
    pub samples: usize,
    pub runs: usize,
    pub seed: u64,
    pub workers: usize,
    /// Fixed sigma_max, or None to pick it by Monte Carlo.
    pub sigma_max: Option<f64>,
    pub memory_cap_log2: f64,
    pub exact_budget: Duration,
}

/// Per-L generator settings: calibrated mu and the chosen sigma_max.
pub fn gen_config(cfg: &BenchConfig, l: usize) -> anyhow::Result<GenConfig> {
    let mu = netgen::calibrate_mu(l, cfg.memory_cap_log2)?;
    let mut g = GenConfig::new(l, mu, 0.0);
    g.memory_cap_log2 = cfg.memory_cap_log2;
    g.seed = cfg.seed;
    g.sigma_max = match cfg.sigma_max {
        Some(s) => s,
        None => netgen::auto_sigma_max(&g, 0.01, 200, 6.0, &mut netgen::sub_rng(cfg.seed, streams::SIGMA_SEARCH, l as u64))?,
    };
    Ok(g)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Runs ratcon and the exact baseline on one simplified graph.
pub fn measure(g: &NetworkGraph, runs: usize, seed: u64, workers: usize, budget: Duration) -> anyhow::Result<BenchRecord> {
    let mut rec = BenchRecord::empty("sample", 0);
    rec.n = Some(g.n());
    let start = Instant::now();
    let emb = planar_embedding(g)?;
    let cw = carving_width(g, &emb)?;
    let cw_time = start.elapsed();
    let target = cw.bs_u128().ok_or_else(|| anyhow::anyhow!("carving width beyond the exact domain"))?;
    let ec = Instant::now();
    let best = best_of(g, &emb, target, runs, seed, workers)?;
    let ec_time = ec.elapsed();
    let rooted = optimal_root(&best.tree, g)?;
    let ct = rooted.metrics().ct;
    rec.carw = Some(cw.carw);
    rec.cw_time_s = Some(secs(cw_time));
    rec.avg_ec_time_s = Some(secs(ec_time) / runs as f64);
    rec.ratcon_time_s = Some(secs(start.elapsed()));
    rec.ratcon_ct = Some(ct.to_string());
    if g.n() <= MAX_DP_N {
        let t = Instant::now();
        if let Some(exact) = exact_min_ct_budget(g, Some(budget))? {
            rec.exact_time_s = Some(secs(t.elapsed()));
            rec.rho = Some(ratio(&ct, &exact.ct));
            rec.exact_ct = Some(exact.ct.to_string());
        }
    }
    Ok(rec)
}

/// a / b as a float, accurate for integers far beyond f64's exact range.
pub fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(60);
    let (x, y) = (a >> shift, b >> shift);
    x.to_f64().unwrap() / y.to_f64().unwrap()
}

/// Sample seeds for L: the global seed offset by the sample index.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Generates and measures every (L, sample) job; records come back sorted by
/// (L, seed) whatever the completion order.
pub fn run(cfg: &BenchConfig) -> anyhow::Result<Vec<BenchRecord>> {
    let mut jobs = Vec::new();
    for &l in &cfg.ls {
        let gc = gen_config(cfg, l)?;
        for i in 0..cfg.samples {
            jobs.push((gc.clone(), sample_seed(cfg.seed, i)));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build()?;
    let mut records: Vec<BenchRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|(gc, s)| {
                let mut gen = netgen::sub_rng(*s, streams::GENERATION, gc.l as u64);
                let carver_seed = netgen::sub_rng(*s, streams::CARVER, gc.l as u64).next_u64();
                let outcome = netgen::sample(gc, &mut gen)
                    .map_err(anyhow::Error::from)
                    .and_then(|(g, _)| Ok(g.simplify()?))
                    .and_then(|g| measure(&g, cfg.runs, carver_seed, 1, cfg.exact_budget));
                let mut rec = outcome.unwrap_or_else(|e| {
                    let mut r = BenchRecord::empty("sample", gc.l);
                    r.error = Some(e.to_string());
                    r
                });
                rec.l = gc.l;
                rec.seed = Some(*s);
                rec
            })
            .collect()
    });
    records.sort_by_key(|r| (r.l, r.seed));
    Ok(records)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) }
}

/// Sample standard deviation (n - 1 denominator); zero for one value.
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Mean, median and stddev rows per L over the sample rows that have a value
/// in each column; rho excludes rows without an exact baseline.
pub fn aggregates(records: &[BenchRecord]) -> Vec<BenchRecord> {
    let mut ls: Vec<usize> = records.iter().filter(|r| r.kind == "sample").map(|r| r.l).collect();
    ls.dedup();
    let mut out = Vec::new();
    for l in ls {
        let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.kind == "sample" && r.l == l).collect();
        let col = |f: fn(&BenchRecord) -> Option<f64>| -> Vec<f64> { rows.iter().filter_map(|r| f(r)).collect() };
        let cols = [
            col(|r| r.carw),
            col(|r| r.cw_time_s),
            col(|r| r.avg_ec_time_s),
            col(|r| r.ratcon_time_s),
            col(|r| r.exact_time_s),
            col(|r| r.rho),
        ];
        for (kind, f) in [("mean", mean as fn(&[f64]) -> f64), ("median", median), ("stddev", stddev)] {
            let stat = |xs: &Vec<f64>| if xs.is_empty() { None } else { Some(f(xs)) };
            let mut r = BenchRecord::empty(kind, l);
            r.carw = stat(&cols[0]);
            r.cw_time_s = stat(&cols[1]);
            r.avg_ec_time_s = stat(&cols[2]);
            r.ratcon_time_s = stat(&cols[3]);
            r.exact_time_s = stat(&cols[4]);
            r.rho = stat(&cols[5]);
            out.push(r);
        }
    }
    out
}

pub fn write_csv(records: &[BenchRecord], out: impl Write) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "kind", "L", "seed", "n", "carw", "cw_time_s", "avg_ec_time_s", "ratcon_time_s", "ratcon_ct", "exact_ct",
        "exact_time_s", "rho", "error",
    ])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl std::io::Read) -> anyhow::Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<BenchRecord>, _>>()?)
}
