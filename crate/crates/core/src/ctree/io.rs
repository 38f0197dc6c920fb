use std::path::Path;

use serde_json::{json, Map, Value};

use super::ContractionTree;
use crate::error::{Error, Result};
use crate::netgraph::NetworkGraph;

/// Shape of a rooted tree; leaves hold vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NestedTree {
    Leaf(usize),
    Node(Box<NestedTree>, Box<NestedTree>),
}

impl NestedTree {
    pub fn node(l: NestedTree, r: NestedTree) -> NestedTree {
        NestedTree::Node(Box::new(l), Box::new(r))
    }

    fn to_value(&self, g: &NetworkGraph) -> Value {
        match self {
            NestedTree::Leaf(v) => json!({ "leaf": g.vertices[*v] }),
            NestedTree::Node(l, r) => json!({ "children": [l.to_value(g), r.to_value(g)] }),
        }
    }

    fn from_value(v: &Value, g: &NetworkGraph, path: &str) -> Result<NestedTree> {
        let obj = v.as_object().ok_or_else(|| Error::Parse(format!("{path}: expected an object")))?;
        if let Some(name) = obj.get("leaf") {
            let name = name.as_str().ok_or_else(|| Error::Parse(format!("{path}.leaf: expected a string")))?;
            let idx = g
                .index_of(name)
                .ok_or_else(|| Error::BadLeafMap(format!("{path}.leaf: unknown vertex {name:?}")))?;
            return Ok(NestedTree::Leaf(idx));
        }
        match obj.get("children").and_then(Value::as_array) {
            Some(kids) if kids.len() == 2 => Ok(NestedTree::node(
                Self::from_value(&kids[0], g, &format!("{path}.children[0]"))?,
                Self::from_value(&kids[1], g, &format!("{path}.children[1]"))?,
            )),
            Some(kids) => Err(Error::BadShape(format!("{path}: node has {} children", kids.len()))),
            None => Err(Error::Parse(format!("{path}: expected \"leaf\" or \"children\""))),
        }
    }
}

/// Reads a tree file against `g`. The result is free when the top-level
/// object carries `"free": true`, otherwise rooted.
pub fn parse_tree(text: &str, g: &NetworkGraph) -> Result<ContractionTree> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("tree file: {e}")))?;
    let free = v.get("free").and_then(Value::as_bool).unwrap_or(false);
    let nested = NestedTree::from_value(&v, g, "tree")?;
    let t = ContractionTree::from_nested(&nested);
    let t = if free && t.root.is_some() { t.unroot()? } else { t };
    t.check_shape(g.n())?;
    Ok(t)
}

pub fn read_tree(path: &Path, g: &NetworkGraph) -> Result<ContractionTree> {
    parse_tree(&std::fs::read_to_string(path)?, g)
}

/// JSON value of a tree. Free trees are rooted at arc 0 for output.
pub fn tree_json(t: &ContractionTree, g: &NetworkGraph) -> Result<Value> {
    if t.root.is_none() && t.arcs.len() == 1 {
        let (a, b) = t.arcs[0];
        let leaf = |x: usize| NestedTree::Leaf(t.leaf[x].unwrap());
        let mut v = NestedTree::node(leaf(a), leaf(b)).to_value(g);
        v.as_object_mut().unwrap().insert("free".into(), Value::Bool(true));
        return Ok(v);
    }
    let (rooted, free) = match t.root {
        Some(_) => (t.clone(), false),
        None => (t.root_at(0)?, true),
    };
    let mut v = rooted.to_nested()?.to_value(g);
    if free {
        let mut m = Map::new();
        m.insert("free".into(), Value::Bool(true));
        m.extend(v.as_object_mut().unwrap().clone());
        v = Value::Object(m);
    }
    Ok(v)
}

pub fn write_tree(t: &ContractionTree, g: &NetworkGraph) -> Result<String> {
    Ok(serde_json::to_string_pretty(&tree_json(t, g)?).expect("tree serializes"))
}
