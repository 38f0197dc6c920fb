//! The `ratcon` command line: pipeline stages, oracles and the benchmark harness.

pub mod bench;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use ratcon::carver::best_of;
use ratcon::ctree::{label_tree, read_tree, write_tree, LabeledTree, Metrics};
use ratcon::netgen::{self, streams, GenConfig, Manifest, SampleRecord};
use ratcon::netgraph::{planar_embedding, read_graph, write_graph};
use ratcon::oracle::{self, exact_min_ct};
use ratcon::ratcatcher::{carving_width_eps, CarvingWidthResult};
use ratcon::sequencer::{optimal_root, sequence, ContractionSequence};
use ratcon::{Error, NetworkGraph};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "ratcon", version, about = "Contraction orders for planar tensor networks")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value_t = ratcon::ratcatcher::DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Merge parallel edges, drop loops, unit edges and free indices.
    Simplify {
        graph: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Carving width of a planar network.
    Width {
        graph: PathBuf,
        /// Require power-of-two weights so carw is an exact integer.
        #[arg(long)]
        exact_pow2: bool,
    },
    /// Optimal-width free contraction tree, best of N random runs by Ct.
    Decompose {
        graph: PathBuf,
        #[arg(short = 'N', default_value_t = 100)]
        n: usize,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Contraction sequence from a tree (free trees are rooted optimally first).
    Sequence {
        graph: PathBuf,
        tree: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Validate a sequence, optionally by contracting random tensors.
    Verify {
        graph: PathBuf,
        seq: PathBuf,
        #[arg(long)]
        numeric: bool,
    },
    /// Exact minimum Ct by subset DP, with a witness tree.
    Exact {
        graph: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Lognormal L x L grids under the memory and biconnectivity rules.
    Generate {
        #[arg(short = 'L')]
        l: usize,
        /// A number, or "auto" to pick it by Monte Carlo.
        #[arg(long, default_value = "auto")]
        sigma_max: String,
        #[arg(short = 'n', default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 36.0)]
        memory_cap_log2: f64,
        #[arg(long, default_value_t = 10_000)]
        max_rejects: usize,
        #[arg(short)]
        o: PathBuf,
    },
    /// Ratcon against the exact baseline on generated grids.
    Bench {
        /// Grid sides, e.g. "4" or "4..5" (inclusive) or "4,5".
        #[arg(short = 'L', default_value = "4")]
        ls: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(short = 'N', default_value_t = 100)]
        n: usize,
        #[arg(long, default_value = "auto")]
        sigma_max: String,
        #[arg(long, default_value_t = 36.0)]
        memory_cap_log2: f64,
        /// Time budget of the exact DP per graph, in seconds.
        #[arg(long, default_value_t = 600.0)]
        budget: f64,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// simplify, embed, width, decompose, root and sequence in one go.
    Pipeline {
        graph: PathBuf,
        #[arg(short = 'N', default_value_t = 100)]
        n: usize,
        /// Output directory for tree.json and seq.json.
        #[arg(short)]
        o: PathBuf,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    NotPlanar(String),
    Input(String),
    Internal { message: String, dump: Option<Value> },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::NotPlanar(_) => 2,
            Failure::Input(_) => 3,
            Failure::Internal { .. } => 4,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::NotPlanar(m) | Failure::Input(m) => m.clone(),
            Failure::Internal { message, dump } => match dump {
                Some(d) => format!("{message}\n{}", serde_json::to_string_pretty(d).unwrap()),
                None => message.clone(),
            },
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::NotPlanar | Error::NotPlanarEmbedding(_) => Failure::NotPlanar(e.to_string()),
            Error::NoEligibleEdge { .. } | Error::InvalidDecomposition(_) => {
                Failure::Internal { message: e.to_string(), dump: None }
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        match e.downcast::<Error>() {
            Ok(inner) => inner.into(),
            Err(e) => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

fn internal(message: impl Into<String>, g: &NetworkGraph) -> Failure {
    let dump = serde_json::from_str(&write_graph(g)).ok();
    Failure::Internal { message: message.into(), dump }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn metrics_json(m: &Metrics) -> Value {
    json!({
        "n": m.n,
        "Bs": m.bs.to_string(),
        "Bt": m.bt.to_string(),
        "Ct": m.ct.to_string(),
        "log2_Bs": m.bs_log2,
        "log2_Bt": m.bt_log2,
        "log2_Ct": m.ct_log2,
    })
}

fn width_json(r: &CarvingWidthResult) -> Value {
    json!({
        "carw": r.carw,
        "Bs": r.bs.to_string(),
        "exact": r.exact,
        "error_bound": r.error_bound,
        "decision_calls": r.decision_calls,
        "elapsed_s": r.elapsed,
    })
}

/// Prints a flat JSON object either as JSON or as a two-line CSV.
fn emit(v: &Value, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(v).unwrap()),
        Format::Csv => {
            let obj = v.as_object().unwrap();
            let cell = |x: &Value| match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(obj.keys()).unwrap();
            w.write_record(obj.values().map(cell)).unwrap();
            w.flush().unwrap();
        }
    }
}

fn workers(cli: &Cli) -> usize {
    cli.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Parses "4", "4..6" or "4,5" into a list of grid sides.
pub fn parse_ls(text: &str) -> Outcome<Vec<usize>> {
    let bad = || Failure::Input(format!("bad L range {text:?}"));
    let text = text.trim();
    if text.is_empty() {
        return Ok(vec![]);
    }
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn parse_sigma(text: &str) -> Outcome<Option<f64>> {
    if text == "auto" {
        return Ok(None);
    }
    text.parse().map(Some).map_err(|_| Failure::Input(format!("bad --sigma-max {text:?}")))
}

fn load_simple(path: &Path) -> Outcome<NetworkGraph> {
    Ok(read_graph(path)?.simplify()?)
}

/// Outputs of one full pipeline run.
#[derive(Debug)]
pub struct PipelineRun {
    pub graph: NetworkGraph,
    pub width: CarvingWidthResult,
    pub free: LabeledTree,
    pub rooted: LabeledTree,
    pub sequence: ContractionSequence,
    pub timings: Vec<(&'static str, f64)>,
}

/// simplify -> embed -> carving width -> best of N -> optimal root -> sequence,
/// re-validating every artifact on the way.
pub fn run_pipeline(raw: &NetworkGraph, runs: usize, seed: u64, workers: usize, eps: f64) -> Outcome<PipelineRun> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, f64)>| {
        timings.push((name, clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };
    let g = raw.simplify()?;
    lap("simplify", &mut timings);
    let emb = planar_embedding(&g)?;
    lap("embed", &mut timings);
    let width = carving_width_eps(&g, &emb, eps)?;
    lap("width", &mut timings);
    let target = width
        .bs_u128()
        .filter(|_| width.exact)
        .ok_or_else(|| Failure::Input("carving width beyond the exact integer domain".into()))?;
    let best = best_of(&g, &emb, target, runs, seed, workers)?;
    lap("decompose", &mut timings);
    let rooted = optimal_root(&best.tree, &g)?;
    let seq = sequence(&rooted)?;
    lap("sequence", &mut timings);

    let free = best.tree;
    if free.metrics().bs != width.bs {
        return Err(internal(format!("tree width {} differs from carving width {}", free.metrics().bs, width.bs), &g));
    }
    if !free.label_properties_hold() || !free.node_weight_identity_check() {
        return Err(internal("tree labels are inconsistent", &g));
    }
    seq.validate(&g).map_err(|e| internal(e.to_string(), &g))?;
    if seq.ct != rooted.metrics().ct {
        return Err(internal("sequence cost differs from the rooted tree's Ct", &g));
    }
    Ok(PipelineRun { graph: g, width, free, rooted, sequence: seq, timings })
}

pub fn run(cli: &Cli) -> Outcome<()> {
    let fmt = cli.format.unwrap_or(Format::Json);
    match &cli.command {
        Command::Simplify { graph, o } => {
            let g = read_graph(graph)?.simplify()?;
            write_out(o, &write_graph(&g))
        }
        Command::Width { graph, exact_pow2 } => {
            let g = load_simple(graph)?;
            if *exact_pow2 && g.edges.iter().any(|e| !e.w.is_power_of_two()) {
                return Err(Failure::Input("--exact-pow2 needs power-of-two weights".into()));
            }
            let emb = planar_embedding(&g)?;
            let r = carving_width_eps(&g, &emb, cli.eps)?;
            emit(&width_json(&r), fmt);
            Ok(())
        }
        Command::Decompose { graph, n, o } => {
            let g = load_simple(graph)?;
            let emb = planar_embedding(&g)?;
            let r = carving_width_eps(&g, &emb, cli.eps)?;
            let target = r.bs_u128().ok_or_else(|| Failure::Input("carving width beyond the exact domain".into()))?;
            let best = best_of(&g, &emb, target, *n, cli.seed, workers(cli))?;
            write_out(o, &write_tree(&best.tree.tree, &g)?)?;
            if o.is_some() {
                emit(&metrics_json(&best.metrics), fmt);
            }
            Ok(())
        }
        Command::Sequence { graph, tree, o } => {
            let g = load_simple(graph)?;
            let t = label_tree(&read_tree(tree, &g)?, &g)?;
            let rooted = if t.tree.is_rooted() { t } else { optimal_root(&t, &g)? };
            let seq = sequence(&rooted)?;
            write_out(o, &seq.to_json(&g))?;
            if o.is_some() {
                emit(
                    &json!({"steps": seq.steps.len(), "Ct": seq.ct.to_string(), "cs_alg1": seq.cs_alg1.to_string(), "peak": seq.peak.to_string()}),
                    fmt,
                );
            }
            Ok(())
        }
        Command::Verify { graph, seq, numeric } => {
            let g = load_simple(graph)?;
            let s = ContractionSequence::read(seq, &g)?;
            s.validate(&g)?;
            let mut report = json!({"valid": true, "steps": s.steps.len(), "Ct": s.ct.to_string()});
            if *numeric {
                let mut rng = netgen::sub_rng(cli.seed, streams::NUMERIC, 0);
                let tensors = oracle::random_tensors(&g, &mut rng);
                let value = oracle::execute(&g, &tensors, &s)?;
                report["value"] = json!([value.re, value.im]);
                match oracle::full_contraction_reference(&g, &tensors) {
                    Ok(reference) => {
                        let rel = (value - reference).norm() / reference.norm().max(f64::MIN_POSITIVE);
                        report["reference"] = json!([reference.re, reference.im]);
                        report["relative_error"] = json!(rel);
                        if rel > 1e-8 {
                            return Err(internal(format!("numeric mismatch, relative error {rel}"), &g));
                        }
                    }
                    Err(Error::TooLarge(_)) => report["reference"] = Value::Null,
                    Err(e) => return Err(e.into()),
                }
            }
            emit(&report, fmt);
            Ok(())
        }
        Command::Exact { graph, o } => {
            let g = load_simple(graph)?;
            let r = exact_min_ct(&g)?;
            let tree: Value = serde_json::from_str(&write_tree(&r.tree, &g)?).unwrap();
            if let Some(p) = o {
                fs::write(p, serde_json::to_string_pretty(&tree).unwrap())?;
                emit(&json!({"exact_ct": r.ct.to_string()}), fmt);
            } else {
                println!("{}", serde_json::to_string_pretty(&json!({"exact_ct": r.ct.to_string(), "tree": tree})).unwrap());
            }
            Ok(())
        }
        Command::Generate { l, sigma_max, count, memory_cap_log2, max_rejects, o } => {
            generate(cli, *l, sigma_max, *count, *memory_cap_log2, *max_rejects, o)
        }
        Command::Bench { ls, samples, n, sigma_max, memory_cap_log2, budget, o } => {
            let cfg = bench::BenchConfig {
                ls: parse_ls(ls)?,
                samples: *samples,
                runs: *n,
                seed: cli.seed,
                workers: workers(cli),
                sigma_max: parse_sigma(sigma_max)?,
                memory_cap_log2: *memory_cap_log2,
                exact_budget: Duration::from_secs_f64(*budget),
            };
            let mut records = bench::run(&cfg)?;
            if let Some(bad) = records.iter().find(|r| !r.respects_floor()) {
                return Err(Failure::Internal {
                    message: format!("ratcon Ct below the exact optimum at L={} seed={:?}", bad.l, bad.seed),
                    dump: None,
                });
            }
            let aggregates = bench::aggregates(&records);
            records.extend(aggregates);
            let text = match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    bench::write_csv(&records, &mut buf)?;
                    String::from_utf8(buf).unwrap()
                }
                Format::Json => serde_json::to_string_pretty(&records).unwrap(),
            };
            match o {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Pipeline { graph, n, o } => {
            let raw = read_graph(graph)?;
            let r = run_pipeline(&raw, *n, cli.seed, workers(cli), cli.eps)?;
            fs::create_dir_all(o)?;
            fs::write(o.join("tree.json"), write_tree(&r.free.tree, &r.graph)?)?;
            fs::write(o.join("seq.json"), r.sequence.to_json(&r.graph))?;
            let mut report = metrics_json(&r.rooted.metrics());
            report["carw"] = json!(r.width.carw);
            report["cs_alg1"] = json!(r.sequence.cs_alg1.to_string());
            report["peak"] = json!(r.sequence.peak.to_string());
            report["flops_lower_bound"] = json!(ratcon::sequencer::flops_lower_bound(&r.sequence.ct).to_string());
            for (name, t) in &r.timings {
                report[format!("{name}_s")] = json!(t);
            }
            emit(&report, fmt);
            Ok(())
        }
    }
}

fn generate(
    cli: &Cli,
    l: usize,
    sigma_max: &str,
    count: usize,
    cap: f64,
    max_rejects: usize,
    out: &Path,
) -> Outcome<()> {
    let d = {
        let (g, emb) = netgen::grid(l.max(2));
        netgen::calibrate_uniform(&g, &emb, cap)?
    };
    let mut cfg = GenConfig::new(l, (d as f64).ln(), 0.0);
    cfg.memory_cap_log2 = cap;
    cfg.max_rejects = max_rejects;
    cfg.seed = cli.seed;
    let auto = parse_sigma(sigma_max)?.is_none();
    cfg.sigma_max = match parse_sigma(sigma_max)? {
        Some(s) => s,
        None => netgen::auto_sigma_max(&cfg, 0.01, 200, 6.0, &mut netgen::sub_rng(cli.seed, streams::SIGMA_SEARCH, l as u64))?,
    };
    fs::create_dir_all(out)?;
    let mut samples = Vec::new();
    for i in 0..count {
        let mut rng = netgen::sub_rng(bench::sample_seed(cli.seed, i), streams::GENERATION, l as u64);
        let (g, stats) = netgen::sample(&cfg, &mut rng)?;
        let file = format!("graph_{i:03}.json");
        fs::write(out.join(&file), write_graph(&g))?;
        samples.push(SampleRecord {
            file,
            index: i,
            draws: stats.draws,
            over_memory: stats.over_memory,
            not_biconnected: stats.not_biconnected,
        });
    }
    let total_draws: usize = samples.iter().map(|s| s.draws).sum();
    let manifest = Manifest {
        config: cfg,
        uniform_d: d,
        sigma_max_auto: auto,
        acceptance_rate: if total_draws == 0 { 0.0 } else { count as f64 / total_draws as f64 },
        total_draws,
        samples,
    };
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap())?;
    emit(&json!({"generated": count, "total_draws": total_draws, "sigma_max": manifest.config.sigma_max}), cli.format.unwrap_or(Format::Json));
    Ok(())
}
