//! Exact density parameters of small patterns.
//!
//! Everything here is exact rational arithmetic; the only float that leaves
//! this module is the sampling threshold n^(-1/m). Patterns are small
//! (uniformity-ℓ hypergraphs, ℓ = 2 for graphs), so density maximization can
//! enumerate all vertex subsets. The maximizer over arbitrary sub-hypergraphs
//! is always attained at a vertex-induced one — removing edges at fixed
//! vertex set only lowers (e-1)/(v-ℓ) — which the test suite re-verifies
//! against a full subgraph brute force on every graph with ≤ 5 vertices.

use num::{BigInt, BigRational, ToPrimitive};

use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;

/// Guard for 2^v subset enumeration.
const MAX_PATTERN_VERTICES: usize = 24;
/// Guard for exact chromatic search.
const MAX_CHROMATIC_VERTICES: usize = 16;

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// m_ℓ(pattern): max over vertex subsets S with |S| ≥ ℓ+1 of
/// (e(S) - 1)/(|S| - ℓ), where e(S) counts induced edges and ℓ is the
/// pattern's uniformity.
pub fn ell_density(pattern: &UniformHypergraph) -> Result<BigRational> {
    let ell = pattern.k();
    let v = pattern.n_vertices();
    if v < ell + 1 {
        return Err(Error::InvalidParameter(format!(
            "density needs at least {} vertices, pattern has {v}",
            ell + 1
        )));
    }
    if v > MAX_PATTERN_VERTICES {
        return Err(Error::GuardExceeded(format!(
            "density enumeration is limited to {MAX_PATTERN_VERTICES} pattern vertices, got {v}"
        )));
    }
    let edge_masks: Vec<u32> = pattern
        .edges()
        .map(|e| e.iter().fold(0u32, |m, &x| m | (1 << x)))
        .collect();
    let mut best: Option<BigRational> = None;
    for mask in 0u32..(1u32 << v) {
        let s = mask.count_ones() as usize;
        if s < ell + 1 {
            continue;
        }
        let e = edge_masks.iter().filter(|&&em| em & mask == em).count();
        let val = ratio(e as i64 - 1, (s - ell) as i64);
        if best.as_ref().is_none_or(|b| val > *b) {
            best = Some(val);
        }
    }
    Ok(best.expect("at least the full vertex set qualifies"))
}

/// m_2 of a graph pattern.
pub fn two_density(pattern: &UniformHypergraph) -> Result<BigRational> {
    if pattern.k() != 2 {
        return Err(Error::InvalidParameter(format!(
            "2-density is defined for graphs, pattern has uniformity {}",
            pattern.k()
        )));
    }
    ell_density(pattern)
}

/// True iff every proper sub-hypergraph has strictly smaller ℓ-density.
///
/// It suffices to check proper vertex-induced subsets: an edge-proper
/// subgraph at fixed vertex set has strictly fewer edges and hence strictly
/// smaller ratio, and any subgraph is dominated by the induced one on its
/// vertex set.
pub fn is_strictly_balanced(pattern: &UniformHypergraph) -> Result<bool> {
    let ell = pattern.k();
    let v = pattern.n_vertices();
    let full = ell_density(pattern)?;
    let edge_masks: Vec<u32> = pattern
        .edges()
        .map(|e| e.iter().fold(0u32, |m, &x| m | (1 << x)))
        .collect();
    for mask in 0u32..(1u32 << v) {
        let s = mask.count_ones() as usize;
        if s < ell + 1 || s == v {
            continue;
        }
        let e = edge_masks.iter().filter(|&&em| em & mask == em).count();
        if ratio(e as i64 - 1, (s - ell) as i64) >= full {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact chromatic number of a small graph by iterative deepening: test
/// c-colorability for c = 1, 2, ... with the usual symmetry break (a vertex
/// may only open one fresh color).
pub fn chromatic_number(pattern: &UniformHypergraph) -> Result<u32> {
    if pattern.k() != 2 {
        return Err(Error::InvalidParameter(
            "chromatic number is defined for graphs (uniformity 2)".into(),
        ));
    }
    let v = pattern.n_vertices();
    if v > MAX_CHROMATIC_VERTICES {
        return Err(Error::GuardExceeded(format!(
            "exact chromatic search is limited to {MAX_CHROMATIC_VERTICES} vertices, got {v}"
        )));
    }
    if v == 0 {
        return Ok(0);
    }
    let mut adj = vec![0u16; v];
    for e in pattern.edges() {
        let (a, b) = (e[0] as usize, e[1] as usize);
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }

    fn colorable(adj: &[u16], colors: &mut [u32], v: usize, c: u32, used: u32) -> bool {
        if v == adj.len() {
            return true;
        }
        let cap = (used + 1).min(c);
        for col in 0..cap {
            if (0..v).all(|u| colors[u] != col || adj[v] & (1 << u) == 0) {
                colors[v] = col;
                if colorable(adj, colors, v + 1, c, used.max(col + 1)) {
                    return true;
                }
            }
        }
        false
    }

    for c in 1..=v as u32 {
        let mut colors = vec![u32::MAX; v];
        if colorable(&adj, &mut colors, 0, c, 0) {
            return Ok(c);
        }
    }
    unreachable!("every graph on v vertices is v-colorable")
}

/// (1 - 1/(chi - 1)) * edge_count, exactly.
pub fn turan_lower_bound(edge_count: u64, chi: u32) -> Result<BigRational> {
    if chi < 2 {
        return Err(Error::InvalidParameter(format!("chromatic number {chi} must be >= 2")));
    }
    Ok(BigRational::new(
        BigInt::from(edge_count) * BigInt::from(chi - 2),
        BigInt::from(chi - 1),
    ))
}

/// The sampling threshold scale n^(-1/m_ℓ(pattern)).
pub fn threshold_probability(pattern: &UniformHypergraph, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let m = ell_density(pattern)?;
    if m <= BigRational::from(BigInt::from(0)) {
        return Err(Error::InvalidParameter(format!("density {m} is not positive")));
    }
    let m_f = m.to_f64().ok_or_else(|| Error::InvalidParameter("density not representable".into()))?;
    Ok((n as f64).powf(-1.0 / m_f))
}

/// Turán densities established in the literature for the named patterns the
/// laboratory ships with; everything else is unknown or out of scope.
pub fn known_turan_density(label: &str) -> Option<BigRational> {
    match label {
        "fano" => Some(ratio(3, 4)),
        "book-3-2" => Some(ratio(2, 9)),
        "book-4-3" => Some(ratio(3, 8)),
        _ => {
            let r: u32 = label.strip_prefix('k')?.parse().ok()?;
            if r >= 2 {
                Some(ratio(r as i64 - 2, r as i64 - 1))
            } else {
                None
            }
        }
    }
}
