use std::collections::HashMap;

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::netgraph::NetworkGraph;
use crate::sequencer::ContractionSequence;

/// Largest joint index space `full_contraction_reference` will sum over.
pub const REFERENCE_LIMIT: u128 = 100_000_000;

/// Dense tensor indexed by edge ids; data is row-major over `labels`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    pub labels: Vec<usize>,
    pub dims: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl DenseTensor {
    pub fn new(labels: Vec<usize>, dims: Vec<usize>, data: Vec<Complex64>) -> Result<DenseTensor> {
        if labels.len() != dims.len() || !labels.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::DimensionMismatch("labels must be sorted, unique, one per dim".into()));
        }
        if data.len() != dims.iter().product::<usize>() {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for shape {dims:?}",
                data.len()
            )));
        }
        Ok(DenseTensor { labels, dims, data })
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }
}

fn shape(g: &NetworkGraph, v: usize) -> (Vec<usize>, Vec<usize>) {
    let labels = g.incident_edges(v);
    let dims = labels.iter().map(|&e| g.edges[e].w as usize).collect();
    (labels, dims)
}

pub fn ones_tensors(g: &NetworkGraph) -> Vec<DenseTensor> {
    (0..g.n())
        .map(|v| {
            let (labels, dims) = shape(g, v);
            let len = dims.iter().product();
            DenseTensor { labels, dims, data: vec![Complex64::new(1.0, 0.0); len] }
        })
        .collect()
}

/// Entries with real and imaginary parts uniform in [-1, 1).
pub fn random_tensors(g: &NetworkGraph, rng: &mut impl Rng) -> Vec<DenseTensor> {
    (0..g.n())
        .map(|v| {
            let (labels, dims) = shape(g, v);
            let len = dims.iter().product();
            let data = (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            DenseTensor { labels, dims, data }
        })
        .collect()
}

/// Sums over shared labels; returns the product and the multiply-add count,
/// which is the size of the joint index space of both operands.
pub fn contract_pair(a: &DenseTensor, b: &DenseTensor) -> Result<(DenseTensor, u128)> {
    let mut union: Vec<(usize, usize)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.labels.len() || j < b.labels.len() {
        let take_a = j == b.labels.len() || (i < a.labels.len() && a.labels[i] <= b.labels[j]);
        if take_a && j < b.labels.len() && a.labels[i] == b.labels[j] {
            if a.dims[i] != b.dims[j] {
                return Err(Error::DimensionMismatch(format!("label {} has dims {} and {}", a.labels[i], a.dims[i], b.dims[j])));
            }
            union.push((a.labels[i], a.dims[i]));
            i += 1;
            j += 1;
        } else if take_a {
            union.push((a.labels[i], a.dims[i]));
            i += 1;
        } else {
            union.push((b.labels[j], b.dims[j]));
            j += 1;
        }
    }
    let shared = |l: usize| a.labels.binary_search(&l).is_ok() && b.labels.binary_search(&l).is_ok();
    let (out_labels, out_dims): (Vec<usize>, Vec<usize>) = union.iter().filter(|&&(l, _)| !shared(l)).copied().unzip();
    let mut out = DenseTensor {
        data: vec![Complex64::new(0.0, 0.0); out_dims.iter().product()],
        labels: out_labels,
        dims: out_dims,
    };
    let stride_in = |t: &DenseTensor| -> Vec<usize> {
        let s = t.strides();
        union.iter().map(|&(l, _)| t.labels.binary_search(&l).map_or(0, |p| s[p])).collect()
    };
    let (sa, sb, so) = (stride_in(a), stride_in(b), stride_in(&out));
    let dims: Vec<usize> = union.iter().map(|&(_, d)| d).collect();
    let total: usize = dims.iter().product();
    let mut idx = vec![0usize; dims.len()];
    let (mut oa, mut ob, mut oo) = (0usize, 0usize, 0usize);
    for _ in 0..total {
        out.data[oo] += a.data[oa] * b.data[ob];
        // Mixed-radix increment, last label fastest.
        for p in (0..dims.len()).rev() {
            idx[p] += 1;
            oa += sa[p];
            ob += sb[p];
            oo += so[p];
            if idx[p] < dims[p] {
                break;
            }
            oa -= sa[p] * dims[p];
            ob -= sb[p] * dims[p];
            oo -= so[p] * dims[p];
            idx[p] = 0;
        }
    }
    Ok((out, total as u128))
}

/// Runs `seq` on real tensors, checking each step's multiply-add count
/// against its recorded cost.
pub fn execute(g: &NetworkGraph, tensors: &[DenseTensor], seq: &ContractionSequence) -> Result<Complex64> {
    if tensors.len() != g.n() {
        return Err(Error::DimensionMismatch(format!("{} tensors for {} vertices", tensors.len(), g.n())));
    }
    for (v, t) in tensors.iter().enumerate() {
        let (labels, dims) = shape(g, v);
        if t.labels != labels || t.dims != dims {
            return Err(Error::DimensionMismatch(format!("tensor of {} does not match its edges", g.vertices[v])));
        }
    }
    let mut live: HashMap<Vec<usize>, DenseTensor> =
        tensors.iter().enumerate().map(|(v, t)| (vec![v], t.clone())).collect();
    for (i, s) in seq.steps.iter().enumerate() {
        let missing = || Error::MalformedSequence(format!("step {i}: operand not available"));
        let a = live.remove(&s.l).ok_or_else(missing)?;
        let b = live.remove(&s.r).ok_or_else(missing)?;
        let (c, madds) = contract_pair(&a, &b)?;
        if BigUint::from(madds) != s.cost {
            return Err(Error::MalformedSequence(format!(
                "step {i}: {madds} multiply-adds but cost {}",
                s.cost
            )));
        }
        live.insert(s.result.clone(), c);
    }
    let all: Vec<usize> = (0..g.n()).collect();
    match live.remove(&all) {
        Some(t) if live.is_empty() && t.labels.is_empty() => Ok(t.data[0]),
        _ => Err(Error::MalformedSequence("sequence does not end in a scalar over all vertices".into())),
    }
}

/// Direct sum over every joint assignment of all edge indices.
pub fn full_contraction_reference(g: &NetworkGraph, tensors: &[DenseTensor]) -> Result<Complex64> {
    let dims: Vec<usize> = g.edges.iter().map(|e| e.w as usize).collect();
    let space = dims.iter().fold(1u128, |a, &d| a.saturating_mul(d as u128));
    if space > REFERENCE_LIMIT {
        return Err(Error::TooLarge(format!("{space} index assignments")));
    }
    let strides: Vec<Vec<usize>> = tensors.iter().map(|t| t.strides()).collect();
    let mut idx = vec![0usize; dims.len()];
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..space {
        let mut term = Complex64::new(1.0, 0.0);
        for (t, s) in tensors.iter().zip(&strides) {
            let off: usize = t.labels.iter().zip(s).map(|(&l, &st)| idx[l] * st).sum();
            term *= t.data[off];
        }
        sum += term;
        for p in (0..dims.len()).rev() {
            idx[p] += 1;
            if idx[p] < dims[p] {
                break;
            }
            idx[p] = 0;
        }
    }
    Ok(sum)
}
