//! The small named patterns the laboratory ships with.

use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;

/// K_r.
pub fn complete_graph(r: usize) -> Result<UniformHypergraph> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!("complete graph needs r >= 2, got {r}")));
    }
    let mut edges = Vec::new();
    for b in 1..r as u32 {
        for a in 0..b {
            edges.push(vec![a, b]);
        }
    }
    UniformHypergraph::new(2, r, edges)
}

/// Path with `edges` edges (edges + 1 vertices).
pub fn path_graph(edges: usize) -> Result<UniformHypergraph> {
    if edges < 1 {
        return Err(Error::InvalidParameter("path needs at least 1 edge".into()));
    }
    let e = (0..edges as u32).map(|i| vec![i, i + 1]).collect();
    UniformHypergraph::new(2, edges + 1, e)
}

/// Cycle with `len` vertices.
pub fn cycle_graph(len: usize) -> Result<UniformHypergraph> {
    if len < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs length >= 3, got {len}")));
    }
    let e = (0..len as u32).map(|i| vec![i, (i + 1) % len as u32]).collect();
    UniformHypergraph::new(2, len, e)
}

/// The Fano plane: 7 points, 7 lines, every two lines meet in one point.
pub fn fano() -> UniformHypergraph {
    UniformHypergraph::new(
        3,
        7,
        vec![
            vec![0, 1, 2],
            vec![0, 3, 4],
            vec![0, 5, 6],
            vec![1, 3, 5],
            vec![1, 4, 6],
            vec![2, 3, 6],
            vec![2, 4, 5],
        ],
    )
    .expect("hard-coded Fano plane is valid")
}

/// The 3-uniform book with 2 pages: edge set {123, 124, 345} on 5 vertices
/// (0-based here).
pub fn book_3_2() -> UniformHypergraph {
    UniformHypergraph::new(3, 5, vec![vec![0, 1, 2], vec![0, 1, 3], vec![2, 3, 4]])
        .expect("hard-coded book is valid")
}

/// The 4-uniform book with 3 pages: edge set {1234, 1235, 1236, 4567} on 7
/// vertices (0-based here).
pub fn book_4_3() -> UniformHypergraph {
    UniformHypergraph::new(
        4,
        7,
        vec![vec![0, 1, 2, 3], vec![0, 1, 2, 4], vec![0, 1, 2, 5], vec![3, 4, 5, 6]],
    )
    .expect("hard-coded book is valid")
}

/// Resolve a pattern by name: `k<r>`, `c<len>`, `p<edges>`, `fano`,
/// `book-3-2`, `book-4-3`.
pub fn named(label: &str) -> Result<UniformHypergraph> {
    if label == "fano" {
        return Ok(fano());
    }
    if label == "book-3-2" {
        return Ok(book_3_2());
    }
    if label == "book-4-3" {
        return Ok(book_4_3());
    }
    let parse_tail = |tail: &str| -> Result<usize> {
        tail.parse::<usize>()
            .map_err(|_| Error::Parse(format!("unknown pattern name {label:?}")))
    };
    if let Some(tail) = label.strip_prefix('k') {
        return complete_graph(parse_tail(tail)?);
    }
    if let Some(tail) = label.strip_prefix('c') {
        return cycle_graph(parse_tail(tail)?);
    }
    if let Some(tail) = label.strip_prefix('p') {
        return path_graph(parse_tail(tail)?);
    }
    Err(Error::Parse(format!("unknown pattern name {label:?}")))
}
