//! k-uniform hypergraphs and the degree/edge-counting functionals.
//!
//! Vertices are dense 0-based ids. Edges are stored as sorted k-tuples in a
//! flat array in lexicographic order, with a per-vertex incidence index built
//! once at construction; every functional below is a loop over (incident)
//! edges with subset tests against [`VertexSubset`] bitmasks.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::subset::VertexSubset;

/// Immutable k-uniform hypergraph in canonical form.
///
/// Invariants: every edge is a strictly increasing k-tuple of ids below
/// `n_vertices`; the edge list is duplicate-free and lexicographically
/// sorted. `edges.len() == 0` is allowed (and meaningful).
#[derive(Clone, PartialEq, Eq)]
pub struct UniformHypergraph {
    k: usize,
    n_vertices: usize,
    flat: Vec<u32>,
    incidence: Vec<Vec<u32>>,
}

impl UniformHypergraph {
    /// Build from an arbitrary edge list. Edges are canonicalized (sorted
    /// within and across); duplicate vertices within an edge, out-of-range
    /// ids, and duplicate edges are errors.
    pub fn new(k: usize, n_vertices: usize, edges: Vec<Vec<u32>>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidHypergraph(format!("uniformity must be >= 2, got {k}")));
        }
        let mut canon: Vec<Vec<u32>> = Vec::with_capacity(edges.len());
        for mut e in edges {
            if e.len() != k {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {e:?} has {} vertices, expected {k}",
                    e.len()
                )));
            }
            e.sort_unstable();
            for w in e.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidHypergraph(format!(
                        "edge {e:?} repeats vertex {}",
                        w[0]
                    )));
                }
            }
            if let Some(&max) = e.last() {
                if max as usize >= n_vertices {
                    return Err(Error::VertexOutOfRange {
                        vertex: max as usize,
                        universe: n_vertices,
                    });
                }
            }
            canon.push(e);
        }
        canon.sort_unstable();
        for w in canon.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidHypergraph(format!("duplicate edge {:?}", w[0])));
            }
        }
        let mut flat = Vec::with_capacity(canon.len() * k);
        for e in &canon {
            flat.extend_from_slice(e);
        }
        let mut incidence = vec![Vec::new(); n_vertices];
        for (idx, e) in canon.iter().enumerate() {
            for &v in e {
                incidence[v as usize].push(idx as u32);
            }
        }
        Ok(UniformHypergraph { k, n_vertices, flat, incidence })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.flat.len() / self.k
    }

    pub fn edge(&self, idx: usize) -> &[u32] {
        &self.flat[idx * self.k..(idx + 1) * self.k]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.flat.chunks_exact(self.k)
    }

    /// Edge indices incident to `v`.
    pub fn incident(&self, v: usize) -> &[u32] {
        &self.incidence[v]
    }

    fn check_universe(&self, u: &VertexSubset) -> Result<()> {
        if u.universe() != self.n_vertices {
            return Err(Error::UniverseMismatch { left: u.universe(), right: self.n_vertices });
        }
        Ok(())
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n_vertices {
            return Err(Error::VertexOutOfRange { vertex: v, universe: self.n_vertices });
        }
        Ok(())
    }

    fn check_level(&self, i: usize) -> Result<()> {
        if i > self.k {
            return Err(Error::LevelOutOfRange { level: i, k: self.k });
        }
        Ok(())
    }

    /// |H[U]|: edges fully contained in U.
    pub fn induced_edge_count(&self, u: &VertexSubset) -> Result<u64> {
        self.check_universe(u)?;
        Ok(self.edges().filter(|e| e.iter().all(|&v| u.contains(v as usize))).count() as u64)
    }

    /// deg(v, U): edges e with v ∈ e and e ⊆ U.
    pub fn deg(&self, v: usize, u: &VertexSubset) -> Result<u64> {
        self.check_vertex(v)?;
        self.check_universe(u)?;
        Ok(self.incidence[v]
            .iter()
            .filter(|&&ei| self.edge(ei as usize).iter().all(|&w| u.contains(w as usize)))
            .count() as u64)
    }

    /// deg_i(v, U): edges e with v ∈ e and |e ∩ (U \ {v})| ≥ i.
    ///
    /// The edge need NOT lie inside U; that is the point of this functional
    /// and what distinguishes it from [`Self::deg_i_inside`].
    pub fn deg_i(&self, v: usize, i: usize, u: &VertexSubset) -> Result<u64> {
        self.check_vertex(v)?;
        self.check_level(i)?;
        self.check_universe(u)?;
        Ok(self.incidence[v]
            .iter()
            .filter(|&&ei| {
                let inside = self
                    .edge(ei as usize)
                    .iter()
                    .filter(|&&w| w as usize != v && u.contains(w as usize))
                    .count();
                inside >= i
            })
            .count() as u64)
    }

    /// deg_i(u, W, U): edges e with u ∈ e, |e ∩ (W \ {u})| ≥ i, and e ⊆ U.
    pub fn deg_i_inside(
        &self,
        v: usize,
        i: usize,
        w: &VertexSubset,
        u: &VertexSubset,
    ) -> Result<u64> {
        self.check_vertex(v)?;
        self.check_level(i)?;
        self.check_universe(u)?;
        self.check_universe(w)?;
        if !w.is_subset_of(u)? {
            return Err(Error::NotASubset("deg_i_inside requires W to be a subset of U".into()));
        }
        Ok(self.incidence[v]
            .iter()
            .filter(|&&ei| {
                let e = self.edge(ei as usize);
                if !e.iter().all(|&x| u.contains(x as usize)) {
                    return false;
                }
                let in_w = e.iter().filter(|&&x| x as usize != v && w.contains(x as usize)).count();
                in_w >= i
            })
            .count() as u64)
    }

    /// |E_U^i(W)|: edges of H[U] with at least i vertices in W.
    pub fn count_edges_with_overlap(
        &self,
        u: &VertexSubset,
        w: &VertexSubset,
        i: usize,
    ) -> Result<u64> {
        self.check_level(i)?;
        self.check_universe(u)?;
        self.check_universe(w)?;
        if !w.is_subset_of(u)? {
            return Err(Error::NotASubset(
                "count_edges_with_overlap requires W to be a subset of U".into(),
            ));
        }
        Ok(self
            .edges()
            .filter(|e| {
                e.iter().all(|&x| u.contains(x as usize))
                    && e.iter().filter(|&&x| w.contains(x as usize)).count() >= i
            })
            .count() as u64)
    }

    /// Vertices u ∈ U with deg_i_inside(u, i, W, U) ≥ threshold.
    pub fn rich_vertices(
        &self,
        u: &VertexSubset,
        w: &VertexSubset,
        i: usize,
        threshold: f64,
    ) -> Result<VertexSubset> {
        if threshold < 0.0 {
            return Err(Error::InvalidParameter(format!("threshold {threshold} must be >= 0")));
        }
        self.check_level(i)?;
        self.check_universe(u)?;
        self.check_universe(w)?;
        if !w.is_subset_of(u)? {
            return Err(Error::NotASubset("rich_vertices requires W to be a subset of U".into()));
        }
        let mut z = VertexSubset::empty(self.n_vertices);
        for v in u.iter() {
            if self.deg_i_inside(v, i, w, u)? as f64 >= threshold {
                z.insert(v)?;
            }
        }
        Ok(z)
    }

    /// Text format: first line `k n m`, then m lines of k space-separated
    /// vertex ids in canonical order. Round-trips bit-exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{} {} {}\n", self.k, self.n_vertices, self.edge_count()));
        for e in self.edges() {
            let words: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            s.push_str(&words.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(Error::Parse(format!("header must be 'k n m', got {header:?}")));
        }
        let parse_num = |s: &str, what: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
        };
        let k = parse_num(head[0], "uniformity")?;
        let n = parse_num(head[1], "vertex count")?;
        let m = parse_num(head[2], "edge count")?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| {
                Error::Parse(format!("expected {m} edge lines, input ended early"))
            })?;
            let edge = line
                .split_whitespace()
                .map(|tok| tok.parse::<u32>().map_err(|_| Error::Parse(format!("bad vertex id {tok:?}"))))
                .collect::<Result<Vec<u32>>>()?;
            edges.push(edge);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content after edge list".into()));
        }
        Self::new(k, n, edges)
    }
}

impl std::fmt::Debug for UniformHypergraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "UniformHypergraph(k={}, n={}, m={})",
            self.k,
            self.n_vertices,
            self.edge_count()
        )
    }
}

#[derive(Serialize, Deserialize)]
struct HypergraphRepr {
    k: usize,
    n_vertices: usize,
    edges: Vec<Vec<u32>>,
}

impl Serialize for UniformHypergraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        HypergraphRepr {
            k: self.k,
            n_vertices: self.n_vertices,
            edges: self.edges().map(|e| e.to_vec()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UniformHypergraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = HypergraphRepr::deserialize(deserializer)?;
        UniformHypergraph::new(repr.k, repr.n_vertices, repr.edges).map_err(D::Error::custom)
    }
}
