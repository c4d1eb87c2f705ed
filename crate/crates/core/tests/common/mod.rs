//! Brute-force oracles shared by the integration tests. Everything here
//! recomputes from the raw edge list with naive loops — no incidence
//! structures, no shared code with the library — so agreement is meaningful.
#![allow(dead_code)]

use exlab_core::subset::VertexSubset;
use exlab_core::UniformHypergraph;
use rand::Rng;

/// All subsets of {0..n} as (bitmask, VertexSubset) pairs.
pub fn all_subsets(n: usize) -> Vec<(u32, VertexSubset)> {
    assert!(n <= 22, "subset enumeration capped");
    (0u32..(1 << n))
        .map(|mask| (mask, subset_of_mask(n, mask)))
        .collect()
}

pub fn subset_of_mask(n: usize, mask: u32) -> VertexSubset {
    VertexSubset::from_members(n, (0..n).filter(|&v| mask >> v & 1 == 1)).unwrap()
}

pub fn mask_contains(mask: u32, v: usize) -> bool {
    mask >> v & 1 == 1
}

/// deg(v, U) the slow way: edges through v lying inside U.
pub fn naive_deg(edges: &[Vec<u32>], v: usize, u_mask: u32) -> u64 {
    edges
        .iter()
        .filter(|e| {
            e.contains(&(v as u32)) && e.iter().all(|&x| mask_contains(u_mask, x as usize))
        })
        .count() as u64
}

/// deg_i(v, U): edges through v with at least i other vertices in U; the
/// edge itself may stick out of U.
pub fn naive_deg_i(edges: &[Vec<u32>], v: usize, i: usize, u_mask: u32) -> u64 {
    edges
        .iter()
        .filter(|e| {
            e.contains(&(v as u32))
                && e.iter()
                    .filter(|&&x| x as usize != v && mask_contains(u_mask, x as usize))
                    .count()
                    >= i
        })
        .count() as u64
}

/// deg_i(v, W, U): edges through v inside U with at least i other vertices
/// in W.
pub fn naive_deg_i_inside(
    edges: &[Vec<u32>],
    v: usize,
    i: usize,
    w_mask: u32,
    u_mask: u32,
) -> u64 {
    edges
        .iter()
        .filter(|e| {
            e.contains(&(v as u32))
                && e.iter().all(|&x| mask_contains(u_mask, x as usize))
                && e.iter()
                    .filter(|&&x| x as usize != v && mask_contains(w_mask, x as usize))
                    .count()
                    >= i
        })
        .count() as u64
}

/// |E_U^i(W)|: edges inside U with at least i vertices in W.
pub fn naive_edges_overlap(edges: &[Vec<u32>], u_mask: u32, w_mask: u32, i: usize) -> u64 {
    edges
        .iter()
        .filter(|e| {
            e.iter().all(|&x| mask_contains(u_mask, x as usize))
                && e.iter().filter(|&&x| mask_contains(w_mask, x as usize)).count() >= i
        })
        .count() as u64
}

pub fn naive_induced(edges: &[Vec<u32>], u_mask: u32) -> u64 {
    edges
        .iter()
        .filter(|e| e.iter().all(|&x| mask_contains(u_mask, x as usize)))
        .count() as u64
}

/// μ_i(H,q) by full 2^n enumeration: Σ_S P(V_q = S) · Σ_v deg_i(v, S)².
pub fn naive_mu_i(h: &UniformHypergraph, q: f64, i: usize) -> f64 {
    let n = h.n_vertices();
    assert!(n <= 22, "mu oracle capped");
    let edges: Vec<Vec<u32>> = h.edges().map(|e| e.to_vec()).collect();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let ones = mask.count_ones() as i32;
        let weight = q.powi(ones) * (1.0 - q).powi(n as i32 - ones);
        if weight == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for v in 0..n {
            let d = naive_deg_i(&edges, v, i, mask) as f64;
            inner += d * d;
        }
        total += weight * inner;
    }
    total
}

/// A random k-uniform hypergraph: each of the C(n,k) possible edges kept
/// independently with probability `edge_p`.
pub fn random_hypergraph<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    edge_p: f64,
) -> UniformHypergraph {
    let mut edges = Vec::new();
    let mut combo: Vec<u32> = (0..k as u32).collect();
    loop {
        if rng.gen::<f64>() < edge_p {
            edges.push(combo.clone());
        }
        // Advance to the next k-combination of {0..n} in lexicographic order.
        let mut idx = k;
        loop {
            if idx == 0 {
                return UniformHypergraph::new(k, n, edges).unwrap();
            }
            idx -= 1;
            if combo[idx] < (n - k + idx) as u32 {
                combo[idx] += 1;
                for j in idx + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}
