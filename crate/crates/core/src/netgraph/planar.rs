//! Combinatorial planar embeddings.
//!
//! Each biconnected block is embedded by path addition (Demoucron, Malgrange
//! and Pertuiset): start from a cycle, then repeatedly route a path of some
//! fragment through a face that contains all of its attachment vertices,
//! preferring fragments with a single admissible face. Block rotations are
//! concatenated at cut vertices.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use super::{ContractMap, NetworkGraph};
use crate::error::{Error, Result};

/// Rotation system plus the faces it induces.
///
/// Darts: `2e` runs from `edges[e].u` to `edges[e].v`, `2e + 1` the other way.
/// The dart after `(a -> b)` on a face leaves `b` along the edge following
/// `(a, b)` in the rotation at `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub rotation: Vec<Vec<usize>>,
    pub faces: Vec<Vec<usize>>,
    /// Face on each side of an edge: `[face of 2e, face of 2e + 1]`.
    pub edge_faces: Vec<[usize; 2]>,
}

fn tail(g: &NetworkGraph, d: usize) -> usize {
    let e = g.edges[d / 2];
    if d % 2 == 0 {
        e.u
    } else {
        e.v
    }
}

fn head(g: &NetworkGraph, d: usize) -> usize {
    let e = g.edges[d / 2];
    if d % 2 == 0 {
        e.v
    } else {
        e.u
    }
}

fn dart_from(g: &NetworkGraph, e: usize, from: usize) -> usize {
    if g.edges[e].u == from {
        2 * e
    } else {
        2 * e + 1
    }
}

/// Traces the faces of a rotation restricted to edges accepted by `live`.
fn trace_faces(
    g: &NetworkGraph,
    rotation: &[Vec<usize>],
    pos: &[Vec<(usize, usize)>],
    live: impl Fn(usize) -> bool,
) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut face_of = vec![usize::MAX; 2 * g.m()];
    let mut faces = Vec::new();
    for d0 in 0..2 * g.m() {
        if !live(d0 / 2) || face_of[d0] != usize::MAX {
            continue;
        }
        let f = faces.len();
        let mut face = Vec::new();
        let mut d = d0;
        while face_of[d] == usize::MAX {
            face_of[d] = f;
            face.push(d);
            let b = head(g, d);
            let e = d / 2;
            let i = pos[b].iter().find(|&&(edge, _)| edge == e).expect("edge in rotation").1;
            let next = rotation[b][(i + 1) % rotation[b].len()];
            d = dart_from(g, next, b);
        }
        faces.push(face);
    }
    (faces, face_of)
}

fn positions(rotation: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    rotation
        .iter()
        .map(|r| r.iter().enumerate().map(|(i, &e)| (e, i)).collect())
        .collect()
}

impl Embedding {
    /// Validates a rotation system against `g` and derives its faces.
    pub fn from_rotation(g: &NetworkGraph, rotation: Vec<Vec<usize>>) -> Result<Embedding> {
        if rotation.len() != g.n() {
            return Err(Error::NotPlanarEmbedding(format!(
                "rotation covers {} vertices, graph has {}",
                rotation.len(),
                g.n()
            )));
        }
        let mut seen = vec![0u8; g.m()];
        for (v, list) in rotation.iter().enumerate() {
            for &e in list {
                let edge = g.edges.get(e).ok_or_else(|| {
                    Error::NotPlanarEmbedding(format!("vertex {v} lists unknown edge {e}"))
                })?;
                if edge.is_loop() || (edge.u != v && edge.v != v) {
                    return Err(Error::NotPlanarEmbedding(format!(
                        "edge {e} listed at non-endpoint {v}"
                    )));
                }
                seen[e] += 1;
            }
        }
        if let Some(e) = (0..g.m()).find(|&e| seen[e] != 2) {
            return Err(Error::NotPlanarEmbedding(format!("edge {e} listed {} times", seen[e])));
        }
        let pos = positions(&rotation);
        let (mut faces, face_of) = trace_faces(g, &rotation, &pos, |_| true);
        if faces.is_empty() {
            faces.push(Vec::new());
        }
        let components = g.components_without(|_| false);
        let euler = g.n() as i64 - g.m() as i64 + faces.len() as i64;
        if euler != 1 + components as i64 {
            return Err(Error::NotPlanarEmbedding(format!(
                "Euler characteristic {euler} with {components} component(s)"
            )));
        }
        let edge_faces = (0..g.m()).map(|e| [face_of[2 * e], face_of[2 * e + 1]]).collect();
        Ok(Embedding { rotation, faces, edge_faces })
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Vertices on the boundary of each face.
    pub fn face_vertices(&self, g: &NetworkGraph) -> Vec<Vec<usize>> {
        self.faces
            .iter()
            .map(|f| {
                let mut vs: Vec<usize> = f.iter().map(|&d| tail(g, d)).collect();
                vs.sort_unstable();
                vs.dedup();
                vs
            })
            .collect()
    }

    /// Embedding of the minor produced by `g.contract_edge(e)`.
    pub fn contract(
        &self,
        g: &NetworkGraph,
        e: usize,
        minor: &NetworkGraph,
        map: &ContractMap,
    ) -> Result<Embedding> {
        let edge = g.edges[e];
        let (keep, gone) = (edge.u.min(edge.v), edge.u.max(edge.v));
        let after = |v: usize| -> Vec<usize> {
            let r = &self.rotation[v];
            let i = r.iter().position(|&x| x == e).expect("contracted edge in rotation");
            (1..r.len()).map(|k| r[(i + k) % r.len()]).collect()
        };
        let mut rotation = vec![Vec::new(); minor.n()];
        for v in 0..g.n() {
            if v == gone {
                continue;
            }
            let old: Vec<usize> = if v == keep {
                after(keep).into_iter().chain(after(gone)).collect()
            } else {
                self.rotation[v].clone()
            };
            rotation[map.vertex[v]] = old
                .into_iter()
                .filter_map(|x| map.edge[x].filter(|&ne| map.representative[ne] == x))
                .collect();
        }
        Embedding::from_rotation(minor, rotation)
    }
}

/// Computes a planar embedding, or honours and validates `g.rotation` when the
/// input supplied one. Deterministic for a fixed vertex and edge order.
pub fn planar_embedding(g: &NetworkGraph) -> Result<Embedding> {
    if let Some(rot) = &g.rotation {
        return Embedding::from_rotation(g, rot.clone());
    }
    if !g.is_simple() {
        return Err(Error::NotPlanarEmbedding("graph must be simple".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.n() >= 3 && g.m() > 3 * g.n() - 6 {
        return Err(Error::NotPlanar);
    }
    let mut rotation = vec![Vec::new(); g.n()];
    for block in g.blocks() {
        let local = if block.len() == 1 {
            let e = g.edges[block[0]];
            vec![(e.u, vec![block[0]]), (e.v, vec![block[0]])]
        } else {
            embed_block(g, &block)?
        };
        for (v, list) in local {
            rotation[v].extend(list);
        }
    }
    Embedding::from_rotation(g, rotation)
}

/// Path-addition embedding of one biconnected block with at least two edges.
fn embed_block(g: &NetworkGraph, block: &[usize]) -> Result<Vec<(usize, Vec<usize>)>> {
    let n = g.n();
    let mut in_block = FixedBitSet::with_capacity(g.m());
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &e in block {
        in_block.insert(e);
        let ed = g.edges[e];
        adj[ed.u].push((ed.v, e));
        adj[ed.v].push((ed.u, e));
    }
    let mut in_h = FixedBitSet::with_capacity(g.m());
    let mut v_in_h = FixedBitSet::with_capacity(n);
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); n];

    // Initial cycle: the first block edge closed by a shortest path avoiding it.
    let e0 = block[0];
    let (a, b) = (g.edges[e0].u, g.edges[e0].v);
    let path = bfs_path(&adj, b, |v| v == a, |e| e != e0, |_| true)
        .ok_or_else(|| Error::NotPlanarEmbedding("block without cycle".into()))?;
    let mut cycle_edges = vec![e0];
    cycle_edges.extend(path.iter().map(|&(_, e)| e));
    for &e in &cycle_edges {
        in_h.insert(e);
        let ed = g.edges[e];
        rotation[ed.u].push(e);
        rotation[ed.v].push(e);
        v_in_h.insert(ed.u);
        v_in_h.insert(ed.v);
    }
    let mut placed = cycle_edges.len();

    while placed < block.len() {
        let pos = positions(&rotation);
        let (faces, _) = trace_faces(g, &rotation, &pos, |e| in_h.contains(e));
        let face_sets: Vec<FixedBitSet> = faces
            .iter()
            .map(|f| {
                let mut s = FixedBitSet::with_capacity(n);
                for &d in f {
                    s.insert(tail(g, d));
                }
                s
            })
            .collect();
        let fragments = fragments(g, block, &adj, &in_h, &v_in_h);
        let mut choice: Option<(usize, usize)> = None;
        for (i, frag) in fragments.iter().enumerate() {
            let admissible: Vec<usize> = (0..faces.len())
                .filter(|&f| frag.attachments.iter().all(|&v| face_sets[f].contains(v)))
                .collect();
            match admissible.len() {
                0 => return Err(Error::NotPlanar),
                1 => {
                    choice = Some((i, admissible[0]));
                    break;
                }
                _ => {
                    if choice.is_none() {
                        choice = Some((i, admissible[0]));
                    }
                }
            }
        }
        let (fi, f) = choice.expect("a fragment remains while edges are unplaced");
        let frag = &fragments[fi];
        let (start, path) = fragment_path(g, &adj, frag, &v_in_h);
        let end = path_end(g, &path, start);

        // Splice the first and last path edges in after the darts entering the
        // endpoints along face f.
        let enter = |v: usize| -> usize {
            faces[f].iter().copied().find(|&d| head(g, d) == v).expect("endpoint on face") / 2
        };
        let (in_start, in_end) = (enter(start), enter(end));
        insert_after(&mut rotation[start], in_start, path[0]);
        insert_after(&mut rotation[end], in_end, *path.last().unwrap());
        let mut v = start;
        for w in path.windows(2) {
            v = g.edges[w[0]].other(v);
            rotation[v].push(w[0]);
            rotation[v].push(w[1]);
            v_in_h.insert(v);
        }
        for &e in &path {
            in_h.insert(e);
        }
        placed += path.len();
    }
    let mut out = Vec::new();
    for v in 0..n {
        if !rotation[v].is_empty() {
            out.push((v, std::mem::take(&mut rotation[v])));
        }
    }
    debug_assert!(block.iter().all(|&e| in_block.contains(e) && in_h.contains(e)));
    Ok(out)
}

fn insert_after(list: &mut Vec<usize>, anchor: usize, e: usize) {
    let i = list.iter().position(|&x| x == anchor).expect("anchor in rotation");
    list.insert(i + 1, e);
}

fn path_end(g: &NetworkGraph, path: &[usize], start: usize) -> usize {
    let mut v = start;
    for &e in path {
        v = g.edges[e].other(v);
    }
    v
}

struct Fragment {
    attachments: Vec<usize>,
    /// Interior vertices (empty for a single chord edge).
    interior: Vec<usize>,
    chord: Option<usize>,
}

fn fragments(
    g: &NetworkGraph,
    block: &[usize],
    adj: &[Vec<(usize, usize)>],
    in_h: &FixedBitSet,
    v_in_h: &FixedBitSet,
) -> Vec<Fragment> {
    let mut out = Vec::new();
    for &e in block {
        let ed = g.edges[e];
        if !in_h.contains(e) && v_in_h.contains(ed.u) && v_in_h.contains(ed.v) {
            out.push(Fragment { attachments: vec![ed.u, ed.v], interior: vec![], chord: Some(e) });
        }
    }
    let mut seen = FixedBitSet::with_capacity(g.n());
    for &e in block {
        for s in [g.edges[e].u, g.edges[e].v] {
            if v_in_h.contains(s) || seen.contains(s) {
                continue;
            }
            let mut interior = vec![s];
            let mut attachments = Vec::new();
            seen.insert(s);
            let mut i = 0;
            while i < interior.len() {
                let x = interior[i];
                i += 1;
                for &(y, _) in &adj[x] {
                    if v_in_h.contains(y) {
                        attachments.push(y);
                    } else if !seen.contains(y) {
                        seen.insert(y);
                        interior.push(y);
                    }
                }
            }
            attachments.sort_unstable();
            attachments.dedup();
            out.push(Fragment { attachments, interior, chord: None });
        }
    }
    out
}

/// A path through the fragment between two distinct attachment vertices,
/// as its start vertex and edge list.
fn fragment_path(
    g: &NetworkGraph,
    adj: &[Vec<(usize, usize)>],
    frag: &Fragment,
    v_in_h: &FixedBitSet,
) -> (usize, Vec<usize>) {
    if let Some(e) = frag.chord {
        return (g.edges[e].u, vec![e]);
    }
    let mut interior = FixedBitSet::with_capacity(g.n());
    for &v in &frag.interior {
        interior.insert(v);
    }
    let a = frag.attachments[0];
    let touches_interior = |e: usize| {
        let ed = g.edges[e];
        interior.contains(ed.u) || interior.contains(ed.v)
    };
    let path = bfs_path(
        adj,
        a,
        |v| v_in_h.contains(v) && v != a,
        touches_interior,
        |v| interior.contains(v) || (v_in_h.contains(v) && v != a),
    )
    .expect("fragment of a biconnected block has two attachments");
    (a, path.into_iter().map(|(_, e)| e).collect())
}

/// Shortest path from `s` to the first vertex satisfying `goal`, using edges
/// allowed by `edge_ok` and entering only vertices allowed by `enter_ok`.
/// Goal vertices are not expanded. Returns `(vertex, edge used)` steps.
fn bfs_path(
    adj: &[Vec<(usize, usize)>],
    s: usize,
    goal: impl Fn(usize) -> bool,
    edge_ok: impl Fn(usize) -> bool,
    enter_ok: impl Fn(usize) -> bool,
) -> Option<Vec<(usize, usize)>> {
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
    let mut seen = FixedBitSet::with_capacity(adj.len());
    seen.insert(s);
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for &(y, e) in &adj[x] {
            if seen.contains(y) || !edge_ok(e) || !enter_ok(y) {
                continue;
            }
            seen.insert(y);
            prev[y] = Some((x, e));
            if goal(y) {
                let mut path = Vec::new();
                let mut v = y;
                while v != s {
                    let (p, e) = prev[v].unwrap();
                    path.push((v, e));
                    v = p;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(y);
        }
    }
    None
}
