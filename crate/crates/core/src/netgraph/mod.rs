//! Weighted multigraph model of a tensor network.
//!
//! Vertices are tensors, edges are shared indices and weights are bond
//! dimensions. Cut weights are products of edge weights and are carried both
//! exactly and as log2.

mod io;
mod planar;

pub use io::{parse_graph, read_graph, write_graph, GraphFile};
pub use planar::{planar_embedding, Embedding};

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;

use crate::error::{Error, Result};

/// A set of vertices, indexed by position in `NetworkGraph::vertices`.
pub type VertexSet = FixedBitSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: u64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkGraph {
    pub vertices: Vec<String>,
    /// Original vertex ids merged into each vertex, sorted. Singletons unless
    /// the graph is a minor produced by `contract_edge`.
    pub atoms: Vec<Vec<String>>,
    pub edges: Vec<Edge>,
    /// Dangling index dimensions per vertex; only meaningful before `simplify`.
    pub free: Vec<(usize, Vec<u64>)>,
    /// Optional rotation system supplied with the input (vertex -> edge ids).
    pub rotation: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutSet {
    pub edges: Vec<usize>,
    pub exact: BigUint,
    pub log2: f64,
}

impl CutSet {
    pub fn from_edges(g: &NetworkGraph, mut edges: Vec<usize>) -> CutSet {
        edges.sort_unstable();
        edges.dedup();
        let mut exact = BigUint::from(1u32);
        let mut log2 = 0.0;
        for &e in &edges {
            let w = g.edges[e].w;
            exact *= w;
            log2 += (w as f64).log2();
        }
        CutSet { edges, exact, log2 }
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }
}

/// Where vertices and edges of a graph went after an edge contraction.
#[derive(Clone, Debug)]
pub struct ContractMap {
    pub vertex: Vec<usize>,
    pub edge: Vec<Option<usize>>,
    /// The old edge kept as representative of each new edge.
    pub representative: Vec<usize>,
}

impl NetworkGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<NetworkGraph> {
        let n = vertices.len();
        let mut seen = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if seen.insert(v.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate vertex id {v:?}")));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::Parse(format!("edge {i} has an endpoint out of range")));
            }
            if e.w == 0 {
                return Err(Error::Parse(format!("edge {i} has weight 0")));
            }
        }
        let atoms = vertices.iter().map(|v| vec![v.clone()]).collect();
        Ok(NetworkGraph { vertices, atoms, edges, free: Vec::new(), rotation: None })
    }

    /// Builds a graph from `(u, v, w)` triples over string ids, creating
    /// vertices in order of first appearance.
    pub fn from_triples(triples: &[(&str, &str, u64)]) -> NetworkGraph {
        let mut ids: Vec<String> = Vec::new();
        let mut index = HashMap::new();
        let mut edges = Vec::new();
        let mut id = |s: &str, ids: &mut Vec<String>| -> usize {
            *index.entry(s.to_string()).or_insert_with(|| {
                ids.push(s.to_string());
                ids.len() - 1
            })
        };
        for &(u, v, w) in triples {
            let (u, v) = (id(u, &mut ids), id(v, &mut ids));
            edges.push(Edge { u, v, w });
        }
        NetworkGraph::new(ids, edges).expect("valid triples")
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| (e.u == u && e.v == v) || (e.u == v && e.v == u))
    }

    pub fn vertex_set(&self, ids: &[&str]) -> VertexSet {
        let mut s = FixedBitSet::with_capacity(self.n());
        for id in ids {
            s.insert(self.index_of(id).unwrap_or_else(|| panic!("unknown vertex {id}")));
        }
        s
    }

    /// Adjacency lists of `(neighbour, edge id)`; loops appear once.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            if !e.is_loop() {
                adj[e.v].push((e.u, i));
            }
        }
        adj
    }

    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        (0..self.m())
            .filter(|&i| self.edges[i].u == v || self.edges[i].v == v)
            .collect()
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|e| !e.is_loop() && seen.insert((e.u.min(e.v), e.u.max(e.v))))
    }

    pub fn is_connected(&self) -> bool {
        self.components_without(|_| false) <= 1
    }

    /// Number of connected components once edges matching `skip` are removed.
    pub fn components_without(&self, skip: impl Fn(usize) -> bool) -> usize {
        let mut dsu = Dsu::new(self.n());
        let mut count = self.n();
        for (i, e) in self.edges.iter().enumerate() {
            if !skip(i) && dsu.union(e.u, e.v) {
                count -= 1;
            }
        }
        count
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.w).max().unwrap_or(1)
    }

    pub fn log2_weight(&self, e: usize) -> f64 {
        (self.edges[e].w as f64).log2()
    }

    /// Merges parallel edges by product, drops loops, drops unit edges unless
    /// needed for connectivity, and clears free indices.
    pub fn simplify(&self) -> Result<NetworkGraph> {
        if self.n() == 0 {
            return Err(Error::EmptyGraph);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut bundle: HashMap<(usize, usize), usize> = HashMap::new();
        let mut merged: Vec<Edge> = Vec::new();
        let mut rep: Vec<usize> = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.is_loop() {
                continue;
            }
            let key = (e.u.min(e.v), e.u.max(e.v));
            match bundle.get(&key) {
                Some(&j) => merged[j].w = merged[j].w.saturating_mul(e.w),
                None => {
                    bundle.insert(key, merged.len());
                    merged.push(*e);
                    rep.push(i);
                }
            }
        }
        // Unit edges go unless they are needed to keep the graph connected.
        let mut dsu = Dsu::new(self.n());
        for e in merged.iter().filter(|e| e.w > 1) {
            dsu.union(e.u, e.v);
        }
        let mut keep = vec![false; merged.len()];
        for (j, e) in merged.iter().enumerate() {
            keep[j] = e.w > 1 || dsu.union(e.u, e.v);
        }
        let mut edges = Vec::new();
        let mut kept_old = Vec::new();
        for (j, e) in merged.into_iter().enumerate() {
            if keep[j] {
                edges.push(e);
                kept_old.push(rep[j]);
            }
        }
        let rotation = self.rotation.as_ref().map(|rot| {
            let mut old_to_new = vec![None; self.m()];
            for (new, &old) in kept_old.iter().enumerate() {
                old_to_new[old] = Some(new);
            }
            rot.iter()
                .map(|list| list.iter().filter_map(|&e| old_to_new[e]).collect())
                .collect()
        });
        Ok(NetworkGraph {
            vertices: self.vertices.clone(),
            atoms: self.atoms.clone(),
            edges,
            free: Vec::new(),
            rotation,
        })
    }

    /// δ(X, Y): edges with one endpoint in each set.
    pub fn cut_set(&self, x: &VertexSet, y: &VertexSet) -> Result<CutSet> {
        if x.intersection(y).next().is_some() {
            return Err(Error::OverlappingSets);
        }
        let edges = (0..self.m())
            .filter(|&i| {
                let e = self.edges[i];
                (x.contains(e.u) && y.contains(e.v)) || (x.contains(e.v) && y.contains(e.u))
            })
            .collect();
        Ok(CutSet::from_edges(self, edges))
    }

    /// δ(X) = δ(X, V \ X).
    pub fn boundary(&self, x: &VertexSet) -> CutSet {
        let edges = (0..self.m())
            .filter(|&i| {
                let e = self.edges[i];
                x.contains(e.u) != x.contains(e.v)
            })
            .collect();
        CutSet::from_edges(self, edges)
    }

    /// δ(X, Y, Z) = δ(X,Y) ⊎ δ(X,Z) ⊎ δ(Y,Z) for a tripartition of V.
    pub fn cut_weight3(&self, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<CutSet> {
        let n = self.n();
        for v in 0..n {
            let hits = x.contains(v) as u8 + y.contains(v) as u8 + z.contains(v) as u8;
            if hits != 1 {
                return Err(Error::BadPartition);
            }
        }
        if [x, y, z].iter().any(|s| s.ones().any(|v| v >= n)) {
            return Err(Error::BadPartition);
        }
        let part = |v: usize| if x.contains(v) { 0 } else if y.contains(v) { 1 } else { 2 };
        let edges = (0..self.m())
            .filter(|&i| part(self.edges[i].u) != part(self.edges[i].v))
            .collect();
        Ok(CutSet::from_edges(self, edges))
    }

    /// The minor G/e. The merged vertex takes the smaller endpoint's slot and
    /// is named by the sorted concatenation of its original ids.
    pub fn contract_edge(&self, e: usize) -> Result<(NetworkGraph, ContractMap)> {
        let Some(edge) = self.edges.get(e).copied() else {
            return Err(Error::NoSuchEdge(e.to_string()));
        };
        let (keep, gone) = (edge.u.min(edge.v), edge.u.max(edge.v));
        let mut vmap = vec![0; self.n()];
        let mut vertices = Vec::with_capacity(self.n() - 1);
        let mut atoms = Vec::with_capacity(self.n() - 1);
        for v in 0..self.n() {
            if v == gone {
                continue;
            }
            vmap[v] = vertices.len();
            if v == keep {
                let mut a: Vec<String> =
                    self.atoms[keep].iter().chain(&self.atoms[gone]).cloned().collect();
                a.sort();
                vertices.push(atom_name(&a));
                atoms.push(a);
            } else {
                vertices.push(self.vertices[v].clone());
                atoms.push(self.atoms[v].clone());
            }
        }
        if gone != keep {
            vmap[gone] = vmap[keep];
        }
        let mut bundle: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut representative = Vec::new();
        let mut emap = vec![None; self.m()];
        for (i, old) in self.edges.iter().enumerate() {
            let (u, v) = (vmap[old.u], vmap[old.v]);
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            match bundle.get(&key) {
                Some(&j) => {
                    edges[j].w = edges[j].w.saturating_mul(old.w);
                    emap[i] = Some(j);
                }
                None => {
                    bundle.insert(key, edges.len());
                    emap[i] = Some(edges.len());
                    representative.push(i);
                    edges.push(Edge { u, v, w: old.w });
                }
            }
        }
        let g = NetworkGraph { vertices, atoms, edges, free: Vec::new(), rotation: None };
        Ok((g, ContractMap { vertex: vmap, edge: emap, representative }))
    }

    /// True iff the graph has at least three vertices, is connected and has no
    /// articulation vertex; a two-vertex graph qualifies iff it has an edge.
    pub fn is_biconnected(&self) -> bool {
        match self.n() {
            0 | 1 => false,
            2 => self.edges.iter().any(|e| !e.is_loop()),
            _ => self.is_connected() && self.articulation_points().is_empty(),
        }
    }

    pub fn articulation_points(&self) -> Vec<usize> {
        let blocks = self.blocks();
        let mut count = vec![0usize; self.n()];
        for b in &blocks {
            let mut vs: Vec<usize> =
                b.iter().flat_map(|&e| [self.edges[e].u, self.edges[e].v]).collect();
            vs.sort_unstable();
            vs.dedup();
            for v in vs {
                count[v] += 1;
            }
        }
        (0..self.n()).filter(|&v| count[v] > 1).collect()
    }

    /// Biconnected components as lists of edge ids (loops excluded), found by
    /// an iterative lowpoint DFS.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let adj = self.adjacency();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut blocks = Vec::new();
        let mut estack: Vec<usize> = Vec::new();
        let mut time = 0;
        for s in 0..n {
            if disc[s] != usize::MAX {
                continue;
            }
            disc[s] = time;
            low[s] = time;
            time += 1;
            // (vertex, edge used to enter it, next adjacency index)
            let mut stack: Vec<(usize, usize, usize)> = vec![(s, usize::MAX, 0)];
            while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
                if *idx < adj[v].len() {
                    let (u, e) = adj[v][*idx];
                    *idx += 1;
                    if e == pe || self.edges[e].is_loop() {
                        continue;
                    }
                    if disc[u] == usize::MAX {
                        estack.push(e);
                        disc[u] = time;
                        low[u] = time;
                        time += 1;
                        stack.push((u, e, 0));
                    } else if disc[u] < disc[v] {
                        estack.push(e);
                        low[v] = low[v].min(disc[u]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[v]);
                        if low[v] >= disc[p] {
                            let mut block = Vec::new();
                            while let Some(e) = estack.pop() {
                                block.push(e);
                                if e == pe {
                                    break;
                                }
                            }
                            block.sort_unstable();
                            blocks.push(block);
                        }
                    }
                }
            }
        }
        blocks
    }

    /// Product of incident weights at `v`, saturating.
    pub fn degree_weight(&self, v: usize) -> u128 {
        self.edges
            .iter()
            .filter(|e| !e.is_loop() && (e.u == v || e.v == v))
            .fold(1u128, |acc, e| acc.saturating_mul(e.w as u128))
    }

    pub fn total_log2(&self) -> f64 {
        self.edges.iter().map(|e| (e.w as f64).log2()).sum()
    }
}

pub(crate) fn atom_name(atoms: &[String]) -> String {
    if atoms.iter().all(|a| a.chars().count() == 1) {
        atoms.concat()
    } else {
        atoms.join("+")
    }
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Dsu {
        Dsu { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a.max(b)] = a.min(b);
        true
    }
}
