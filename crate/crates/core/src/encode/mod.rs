//! Encodings of concrete extremal problems as uniform hypergraphs.
//!
//! Each encoding fixes a ground set of base objects (edges of K_n, ℓ-subsets
//! of [n], integers, group elements), assigns them dense vertex ids, and
//! lists every forbidden configuration as a hypergraph edge over those ids.
//! A subset of base objects is free of the configuration exactly when it
//! induces no hypergraph edge, which is what the solvers exploit.

pub mod family;
pub mod group;
pub mod patterns;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::combin::{all_subsets_colex, binomial, colex_index};
use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;

pub use family::{PartiteFamily, TargetFamily};
pub use group::{encode_schur, GroupSpec};

/// Default cap on encoding vertices (C(n,ℓ) for the copy encodings).
pub const DEFAULT_MAX_VERTICES: u64 = 100_000;

/// What a vertex id stands for in the base problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VertexMeaning {
    /// An ℓ-subset of the base point set [n] (an edge of K_n when ℓ = 2).
    BaseSet { points: Vec<u32> },
    /// An integer in [1, n].
    Integer { value: u64 },
    /// A group element in mixed-radix coordinates.
    GroupElement { coords: Vec<u64> },
}

/// Which construction produced an encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseDescriptor {
    GraphCopies { pattern_label: String, pattern: UniformHypergraph, n: usize },
    HypergraphCopies { pattern_label: String, pattern: UniformHypergraph, n: usize },
    Aps { n: usize, ap_length: usize },
    Schur { group: GroupSpec },
}

/// A hypergraph plus the metadata tying its vertices back to base objects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub label: String,
    pub hypergraph: UniformHypergraph,
    pub base: BaseDescriptor,
    /// Vertex-id sets of size 1 or 2 that also violate the property
    /// (x + x = z collapses in Schur encodings); empty elsewhere. Consumed
    /// only by strict-mode solvers.
    pub degenerate_constraints: Vec<Vec<u32>>,
    /// Indexed by vertex id.
    pub vertex_meaning: Vec<VertexMeaning>,
}

impl Encoding {
    /// The number of base points for partition-defined target families
    /// (K_n / ℓ-set ground set size), if this encoding has one.
    pub fn base_points(&self) -> Option<usize> {
        match &self.base {
            BaseDescriptor::GraphCopies { n, .. } | BaseDescriptor::HypergraphCopies { n, .. } => {
                Some(*n)
            }
            BaseDescriptor::Aps { .. } | BaseDescriptor::Schur { .. } => None,
        }
    }

    /// Write `{base_path}.txt` (hypergraph text format) and
    /// `{base_path}.json` (label, base descriptor, meanings, constraints).
    pub fn write_files(&self, base_path: &Path) -> Result<()> {
        let txt = base_path.with_extension("txt");
        let json = base_path.with_extension("json");
        std::fs::write(txt, self.hypergraph.to_text())?;
        let sidecar = Sidecar {
            label: self.label.clone(),
            base: self.base.clone(),
            degenerate_constraints: self.degenerate_constraints.clone(),
            vertex_meaning: self.vertex_meaning.clone(),
        };
        let mut body = serde_json::to_string_pretty(&sidecar)?;
        body.push('\n');
        std::fs::write(json, body)?;
        Ok(())
    }

    pub fn read_files(base_path: &Path) -> Result<Encoding> {
        let txt = std::fs::read_to_string(base_path.with_extension("txt"))?;
        let hypergraph = UniformHypergraph::parse_text(&txt)?;
        let sidecar: Sidecar =
            serde_json::from_str(&std::fs::read_to_string(base_path.with_extension("json"))?)?;
        let enc = Encoding {
            label: sidecar.label,
            hypergraph,
            base: sidecar.base,
            degenerate_constraints: sidecar.degenerate_constraints,
            vertex_meaning: sidecar.vertex_meaning,
        };
        enc.validate()?;
        Ok(enc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertex_meaning.len() != self.hypergraph.n_vertices() {
            return Err(Error::InvalidParameter(format!(
                "vertex_meaning has {} entries for {} vertices",
                self.vertex_meaning.len(),
                self.hypergraph.n_vertices()
            )));
        }
        let is_schur = matches!(self.base, BaseDescriptor::Schur { .. });
        for c in &self.degenerate_constraints {
            if !is_schur {
                return Err(Error::InvalidParameter(
                    "degenerate constraints only occur in Schur encodings".into(),
                ));
            }
            if c.is_empty() || c.len() > 2 {
                return Err(Error::InvalidParameter(format!(
                    "degenerate constraint {c:?} must have size 1 or 2"
                )));
            }
            if c.iter().any(|&v| v as usize >= self.hypergraph.n_vertices()) {
                return Err(Error::InvalidParameter(format!(
                    "degenerate constraint {c:?} out of range"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    label: String,
    base: BaseDescriptor,
    degenerate_constraints: Vec<Vec<u32>>,
    vertex_meaning: Vec<VertexMeaning>,
}

/// Enumerate the distinct image edge-id sets of all injective copies of
/// `pattern` into the complete ℓ-uniform host on [n].
///
/// The host is complete, so every injection is a copy; only the vertices
/// covered by pattern edges matter for the image edge set, and the BTreeSet
/// collapses automorphic images.
fn copy_edge_sets(pattern: &UniformHypergraph, n: usize) -> Result<BTreeSet<Vec<u32>>> {
    let covered: Vec<usize> =
        (0..pattern.n_vertices()).filter(|&v| !pattern.incident(v).is_empty()).collect();
    let mut out = BTreeSet::new();
    let mut assign = vec![0u32; pattern.n_vertices()];
    let mut used = vec![false; n];

    fn rec(
        pattern: &UniformHypergraph,
        covered: &[usize],
        depth: usize,
        n: usize,
        assign: &mut Vec<u32>,
        used: &mut Vec<bool>,
        out: &mut BTreeSet<Vec<u32>>,
    ) -> Result<()> {
        if depth == covered.len() {
            let mut ids = Vec::with_capacity(pattern.edge_count());
            for e in pattern.edges() {
                let mut img: Vec<u32> = e.iter().map(|&pv| assign[pv as usize]).collect();
                img.sort_unstable();
                ids.push(colex_index(&img)? as u32);
            }
            ids.sort_unstable();
            out.insert(ids);
            return Ok(());
        }
        for host in 0..n {
            if !used[host] {
                used[host] = true;
                assign[covered[depth]] = host as u32;
                rec(pattern, covered, depth + 1, n, assign, used, out)?;
                used[host] = false;
            }
        }
        Ok(())
    }

    rec(pattern, &covered, 0, n, &mut assign, &mut used, &mut out)?;
    Ok(out)
}

fn encode_copies(
    pattern: &UniformHypergraph,
    pattern_label: &str,
    n: usize,
    graph_case: bool,
    max_vertices: u64,
) -> Result<Encoding> {
    let ell = pattern.k();
    if pattern.edge_count() < 2 {
        return Err(Error::InvalidParameter(format!(
            "pattern needs at least 2 edges to yield uniformity >= 2, has {}",
            pattern.edge_count()
        )));
    }
    if n < pattern.n_vertices() {
        return Err(Error::InvalidParameter(format!(
            "host size {n} is smaller than the pattern's {} vertices",
            pattern.n_vertices()
        )));
    }
    let n_enc = binomial(n as u64, ell as u64)?;
    if n_enc > max_vertices {
        return Err(Error::GuardExceeded(format!(
            "encoding would have {n_enc} vertices (limit {max_vertices})"
        )));
    }
    let n_enc = n_enc as usize;
    let edges: Vec<Vec<u32>> = copy_edge_sets(pattern, n)?.into_iter().collect();
    let hypergraph = UniformHypergraph::new(pattern.edge_count(), n_enc, edges)?;
    let vertex_meaning = all_subsets_colex(n, ell)?
        .into_iter()
        .map(|points| VertexMeaning::BaseSet { points })
        .collect();
    let base = if graph_case {
        BaseDescriptor::GraphCopies {
            pattern_label: pattern_label.to_string(),
            pattern: pattern.clone(),
            n,
        }
    } else {
        BaseDescriptor::HypergraphCopies {
            pattern_label: pattern_label.to_string(),
            pattern: pattern.clone(),
            n,
        }
    };
    Ok(Encoding {
        label: format!("{pattern_label}-copies-n{n}"),
        hypergraph,
        base,
        degenerate_constraints: Vec::new(),
        vertex_meaning,
    })
}

/// Copies of a graph pattern in K_n: vertices are the C(n,2) edges of K_n in
/// colex order (pair (a,b), a<b, gets id b(b-1)/2 + a); hypergraph edges are
/// the distinct edge sets of injective copies; uniformity = e(pattern).
pub fn encode_graph_copies(
    pattern: &UniformHypergraph,
    pattern_label: &str,
    n: usize,
) -> Result<Encoding> {
    if pattern.k() != 2 {
        return Err(Error::InvalidParameter(
            "encode_graph_copies expects a graph pattern (uniformity 2)".into(),
        ));
    }
    encode_copies(pattern, pattern_label, n, true, DEFAULT_MAX_VERTICES)
}

/// Copies of an ℓ-uniform pattern in the complete ℓ-uniform hypergraph on
/// [n]: vertices are all C(n,ℓ) ℓ-sets in colex order.
pub fn encode_hypergraph_copies(
    pattern: &UniformHypergraph,
    pattern_label: &str,
    n: usize,
) -> Result<Encoding> {
    encode_copies(pattern, pattern_label, n, false, DEFAULT_MAX_VERTICES)
}

/// Same, with an explicit vertex-count cap for callers that accept the cost.
pub fn encode_copies_with_limit(
    pattern: &UniformHypergraph,
    pattern_label: &str,
    n: usize,
    max_vertices: u64,
) -> Result<Encoding> {
    encode_copies(pattern, pattern_label, n, pattern.k() == 2, max_vertices)
}

/// Arithmetic progressions: vertex v stands for the integer v+1 in [1, n];
/// edges are all ap_length-term APs with difference d ≥ 1 inside the range.
pub fn encode_aps(n: usize, ap_length: usize) -> Result<Encoding> {
    if ap_length < 3 {
        return Err(Error::InvalidParameter(format!("ap_length {ap_length} must be >= 3")));
    }
    if n < ap_length {
        return Err(Error::InvalidParameter(format!("n={n} is smaller than ap_length={ap_length}")));
    }
    let mut edges = Vec::new();
    for d in 1..=(n - 1) / (ap_length - 1) {
        for a in 1..=(n - (ap_length - 1) * d) {
            let edge: Vec<u32> = (0..ap_length).map(|j| (a + j * d - 1) as u32).collect();
            edges.push(edge);
        }
    }
    let hypergraph = UniformHypergraph::new(ap_length, n, edges)?;
    let vertex_meaning =
        (1..=n as u64).map(|value| VertexMeaning::Integer { value }).collect();
    Ok(Encoding {
        label: format!("aps-l{ap_length}-n{n}"),
        hypergraph,
        base: BaseDescriptor::Aps { n, ap_length },
        degenerate_constraints: Vec::new(),
        vertex_meaning,
    })
}
