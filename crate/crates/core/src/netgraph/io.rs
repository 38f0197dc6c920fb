//! JSON graph files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Edge, NetworkGraph};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub free: Vec<FreeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<BTreeMap<String, Vec<usize>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub w: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreeRecord {
    pub v: String,
    pub dims: Vec<u64>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<NetworkGraph> {
        let index: BTreeMap<&str, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let lookup = |id: &str, field: String| -> Result<usize> {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Parse(format!("{field}: unknown vertex {id:?}")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            if e.w == 0 {
                return Err(Error::Parse(format!("edges[{i}].w: weight must be a positive integer")));
            }
            let u = lookup(&e.u, format!("edges[{i}].u"))?;
            let v = lookup(&e.v, format!("edges[{i}].v"))?;
            edges.push(Edge { u, v, w: e.w });
        }
        let mut g = NetworkGraph::new(self.vertices.clone(), edges)?;
        for (i, f) in self.free.iter().enumerate() {
            if f.dims.contains(&0) {
                return Err(Error::Parse(format!("free[{i}].dims: dimensions must be positive")));
            }
            g.free.push((lookup(&f.v, format!("free[{i}].v"))?, f.dims.clone()));
        }
        if let Some(rot) = &self.rotation {
            let mut rotation = vec![Vec::new(); g.n()];
            for (id, list) in rot {
                rotation[lookup(id, format!("rotation.{id}"))?] = list.clone();
            }
            g.rotation = Some(rotation);
        }
        Ok(g)
    }

    pub fn from_graph(g: &NetworkGraph) -> GraphFile {
        GraphFile {
            vertices: g.vertices.clone(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    u: g.vertices[e.u].clone(),
                    v: g.vertices[e.v].clone(),
                    w: e.w,
                })
                .collect(),
            free: g
                .free
                .iter()
                .map(|(v, dims)| FreeRecord { v: g.vertices[*v].clone(), dims: dims.clone() })
                .collect(),
            rotation: g.rotation.as_ref().map(|rot| {
                rot.iter().enumerate().map(|(v, l)| (g.vertices[v].clone(), l.clone())).collect()
            }),
        }
    }
}

pub fn parse_graph(text: &str) -> Result<NetworkGraph> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph file: {e}")))?;
    file.into_graph()
}

pub fn read_graph(path: &Path) -> Result<NetworkGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn write_graph(g: &NetworkGraph) -> String {
    serde_json::to_string_pretty(&GraphFile::from_graph(g)).expect("graph serializes")
}
