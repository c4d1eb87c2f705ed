//! Encoding constructions against independent enumeration oracles.
//!
//! Copy encodings are re-derived here from scratch: enumerate every
//! injection of the pattern into [n] by DFS, collect image edge-sets, and
//! demand set equality with the encoding's edges decoded through
//! vertex_meaning. Counts that the rest of the suite leans on (triangle
//! counts, book copy counts, Fano's 30) are additionally pinned as
//! literals so a regression in *both* sides cannot slip through silently.

mod common;

use std::collections::BTreeSet;

use exlab_core::combin::binomial;
use exlab_core::encode::{
    self, encode_aps, encode_graph_copies, encode_hypergraph_copies, encode_schur,
    group::{group_type_i, is_strict_sumfree, mu_max_sumfree_density},
    patterns, Encoding, GroupSpec, TargetFamily, VertexMeaning,
};
use exlab_core::subset::VertexSubset;
use num::rational::BigRational;
use num::FromPrimitive;

/// Decode one hypergraph edge to the sorted list of base ℓ-sets it names.
fn decode_edge(enc: &Encoding, edge: &[u32]) -> Vec<Vec<u32>> {
    let mut sets: Vec<Vec<u32>> = edge
        .iter()
        .map(|&v| match &enc.vertex_meaning[v as usize] {
            VertexMeaning::BaseSet { points } => {
                let mut p = points.clone();
                p.sort_unstable();
                p
            }
            other => panic!("copy encoding vertex decodes to {other:?}"),
        })
        .collect();
    sets.sort();
    sets
}

/// Every image edge-set of an injective copy of `pattern` in [n],
/// enumerated the slow way and deduplicated.
fn oracle_copy_edge_sets(
    pattern: &exlab_core::UniformHypergraph,
    n: usize,
) -> BTreeSet<Vec<Vec<u32>>> {
    let pv = pattern.n_vertices();
    let pattern_edges: Vec<Vec<u32>> = pattern.edges().map(|e| e.to_vec()).collect();
    let mut out = BTreeSet::new();
    let mut image = vec![u32::MAX; pv];
    let mut used = vec![false; n];
    fn dfs(
        depth: usize,
        n: usize,
        image: &mut [u32],
        used: &mut [bool],
        pattern_edges: &[Vec<u32>],
        out: &mut BTreeSet<Vec<Vec<u32>>>,
    ) {
        if depth == image.len() {
            let mut sets: Vec<Vec<u32>> = pattern_edges
                .iter()
                .map(|e| {
                    let mut s: Vec<u32> = e.iter().map(|&v| image[v as usize]).collect();
                    s.sort_unstable();
                    s
                })
                .collect();
            sets.sort();
            out.insert(sets);
            return;
        }
        for target in 0..n {
            if !used[target] {
                used[target] = true;
                image[depth] = target as u32;
                dfs(depth + 1, n, image, used, pattern_edges, out);
                used[target] = false;
            }
        }
    }
    dfs(0, n, &mut image, &mut used, &pattern_edges, &mut out);
    out
}

fn assert_copies_match_oracle(enc: &Encoding, pattern: &exlab_core::UniformHypergraph, n: usize) {
    let expect = oracle_copy_edge_sets(pattern, n);
    let got: BTreeSet<Vec<Vec<u32>>> =
        enc.hypergraph.edges().map(|e| decode_edge(enc, e)).collect();
    assert_eq!(got.len(), enc.hypergraph.edge_count(), "duplicate edges after decoding");
    assert_eq!(got, expect);
}

#[test]
fn triangle_encoding_matches_injection_oracle() {
    let k3 = patterns::complete_graph(3).unwrap();
    for n in 3..=8 {
        let enc = encode_graph_copies(&k3, "k3", n).unwrap();
        assert_copies_match_oracle(&enc, &k3, n);
        assert_eq!(enc.hypergraph.edge_count() as u64, binomial(n as u64, 3).unwrap());
    }
    // Pinned examples: every triangle of K_4 / the single triangle of K_3.
    let e4 = encode_graph_copies(&k3, "k3", 4).unwrap();
    assert_eq!((e4.hypergraph.n_vertices(), e4.hypergraph.edge_count()), (6, 4));
    let e3 = encode_graph_copies(&k3, "k3", 3).unwrap();
    assert_eq!((e3.hypergraph.n_vertices(), e3.hypergraph.edge_count()), (3, 1));
}

#[test]
fn small_pattern_encodings_match_injection_oracle() {
    let p2 = patterns::path_graph(2).unwrap();
    let enc = encode_graph_copies(&p2, "p2", 3).unwrap();
    assert_eq!((enc.hypergraph.k(), enc.hypergraph.edge_count()), (2, 3));
    assert_copies_match_oracle(&enc, &p2, 3);

    for n in 3..=6 {
        let enc = encode_graph_copies(&p2, "p2", n).unwrap();
        assert_copies_match_oracle(&enc, &p2, n);
    }
    let c5 = patterns::cycle_graph(5).unwrap();
    let enc = encode_graph_copies(&c5, "c5", 6).unwrap();
    assert_copies_match_oracle(&enc, &c5, 6);
}

#[test]
fn book_encodings_match_injection_oracle() {
    // 3-uniform book with pages {123, 124} and cover {345}: 30 copies in [5].
    let b32 = patterns::book_3_2();
    let enc = encode_hypergraph_copies(&b32, "book-3-2", 5).unwrap();
    assert_eq!(enc.hypergraph.k(), 3);
    assert_eq!(enc.hypergraph.n_vertices(), 10);
    assert_copies_match_oracle(&enc, &b32, 5);
    assert_eq!(enc.hypergraph.edge_count(), 30);

    // 4-uniform book {1234, 1235, 1236, 4567}: 140 copies in [7].
    let b43 = patterns::book_4_3();
    let enc = encode_hypergraph_copies(&b43, "book-4-3", 7).unwrap();
    assert_eq!(enc.hypergraph.k(), 4);
    assert_eq!(enc.hypergraph.n_vertices(), 35);
    assert_copies_match_oracle(&enc, &b43, 7);
    assert_eq!(enc.hypergraph.edge_count(), 140);
}

#[test]
fn fano_encoding_matches_injection_oracle() {
    let fano = patterns::fano();
    assert_eq!((fano.n_vertices(), fano.edge_count()), (7, 7));
    let enc = encode_hypergraph_copies(&fano, "fano", 7).unwrap();
    assert_eq!(enc.hypergraph.k(), 7);
    assert_eq!(enc.hypergraph.n_vertices(), 35);
    assert_copies_match_oracle(&enc, &fano, 7);
    // 7!/|Aut| with the Fano plane's automorphism group of order 168.
    assert_eq!(enc.hypergraph.edge_count(), 30);
}

#[test]
fn ap_encoding_matches_loop_oracle() {
    // 1-based progressions in [5] of length 3.
    let enc = encode_aps(5, 3).unwrap();
    let got: BTreeSet<Vec<u64>> = enc
        .hypergraph
        .edges()
        .map(|e| {
            let mut vals: Vec<u64> = e
                .iter()
                .map(|&v| match &enc.vertex_meaning[v as usize] {
                    VertexMeaning::Integer { value } => *value,
                    other => panic!("AP vertex decodes to {other:?}"),
                })
                .collect();
            vals.sort_unstable();
            vals
        })
        .collect();
    let expect: BTreeSet<Vec<u64>> =
        [vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5], vec![1, 3, 5]].into_iter().collect();
    assert_eq!(got, expect);

    assert_eq!(encode_aps(3, 3).unwrap().hypergraph.edge_count(), 1);

    // Length-4 case re-counted with an independent (start, difference) loop.
    for n in 4..=12usize {
        let enc = encode_aps(n, 4).unwrap();
        let mut count = 0usize;
        for a in 1..=n {
            let mut d = 1;
            while a + 3 * d <= n {
                count += 1;
                d += 1;
            }
        }
        assert_eq!(enc.hypergraph.edge_count(), count, "n={n}");
        // Every edge really is an AP.
        for e in enc.hypergraph.edges() {
            let vals: Vec<u32> = {
                let mut v = e.to_vec();
                v.sort_unstable();
                v
            };
            let d = vals[1] - vals[0];
            assert!(d >= 1);
            assert!(vals.windows(2).all(|w| w[1] - w[0] == d));
        }
    }
}

/// Independent Schur oracle: all pairwise-distinct {x,y,z} with x+y=z,
/// found by a full ordered triple loop.
fn oracle_schur_triples(group: &GroupSpec) -> BTreeSet<Vec<u32>> {
    let n = group.order();
    let mut out = BTreeSet::new();
    for x in 0..n {
        for y in 0..n {
            let z = group.add(x, y);
            if x != y && y != z && x != z {
                let mut t = vec![x as u32, y as u32, z as u32];
                t.sort_unstable();
                out.insert(t);
            }
        }
    }
    out
}

#[test]
fn schur_encoding_matches_triple_loop_oracle() {
    for spec in [
        GroupSpec::cyclic(2).unwrap(),
        GroupSpec::cyclic(3).unwrap(),
        GroupSpec::cyclic(5).unwrap(),
        GroupSpec::cyclic(8).unwrap(),
        GroupSpec::cyclic(20).unwrap(),
        GroupSpec::new(vec![2, 3]).unwrap(),
        GroupSpec::new(vec![3, 3]).unwrap(),
    ] {
        let enc = encode_schur(&spec).unwrap();
        let got: BTreeSet<Vec<u32>> = enc.hypergraph.edges().map(|e| e.to_vec()).collect();
        assert_eq!(got, oracle_schur_triples(&spec), "group {spec}");
    }

    let z5 = encode_schur(&GroupSpec::cyclic(5).unwrap()).unwrap();
    let edges: BTreeSet<Vec<u32>> = z5.hypergraph.edges().map(|e| e.to_vec()).collect();
    assert!(edges.contains(&vec![1, 2, 3]));
    assert!(edges.contains(&vec![1, 3, 4]));
    assert!(z5.degenerate_constraints.contains(&vec![1, 2]), "1+1=2 pair");
    assert!(z5.degenerate_constraints.contains(&vec![0]), "0+0=0 singleton");

    let z3 = encode_schur(&GroupSpec::cyclic(3).unwrap()).unwrap();
    let edges: Vec<Vec<u32>> = z3.hypergraph.edges().map(|e| e.to_vec()).collect();
    assert_eq!(edges, vec![vec![0, 1, 2]]);

    let z2 = encode_schur(&GroupSpec::cyclic(2).unwrap()).unwrap();
    assert_eq!(z2.hypergraph.edge_count(), 0);
    assert!(z2.degenerate_constraints.contains(&vec![0, 1]), "1+1=0 pair");
}

#[test]
fn type_classification_and_density_formula() {
    assert_eq!(group_type_i(&GroupSpec::cyclic(5).unwrap()), Some(5));
    assert_eq!(group_type_i(&GroupSpec::cyclic(20).unwrap()), Some(2));
    assert_eq!(group_type_i(&GroupSpec::cyclic(9).unwrap()), None);

    let rat = |num: i64, den: i64| {
        BigRational::new(
            num::BigInt::from_i64(num).unwrap(),
            num::BigInt::from_i64(den).unwrap(),
        )
    };
    assert_eq!(mu_max_sumfree_density(&GroupSpec::cyclic(5).unwrap()).unwrap(), rat(2, 5));
    assert_eq!(mu_max_sumfree_density(&GroupSpec::cyclic(8).unwrap()).unwrap(), rat(1, 2));
    assert_eq!(mu_max_sumfree_density(&GroupSpec::cyclic(20).unwrap()).unwrap(), rat(1, 2));
    assert!(mu_max_sumfree_density(&GroupSpec::cyclic(9).unwrap()).is_err());
}

#[test]
fn sumfree_families_are_exhaustive_and_small() {
    // Z_5: exactly the two maximum sets.
    let z5 = GroupSpec::cyclic(5).unwrap();
    let fam = encode::family::target_family_sumfree_max(&z5, 30).unwrap();
    let TargetFamily::ExplicitSets { sets } = &fam else { panic!("expected explicit family") };
    let got: BTreeSet<Vec<usize>> = sets.iter().map(|s| s.members()).collect();
    let expect: BTreeSet<Vec<usize>> = [vec![1, 4], vec![2, 3]].into_iter().collect();
    assert_eq!(got, expect);

    // Z_8: contains the odd residues, and every member has size 4.
    let z8 = GroupSpec::cyclic(8).unwrap();
    let fam = encode::family::target_family_sumfree_max(&z8, 30).unwrap();
    let TargetFamily::ExplicitSets { sets } = &fam else { panic!("expected explicit family") };
    let odds = VertexSubset::from_members(8, [1usize, 3, 5, 7]).unwrap();
    assert!(sets.contains(&odds));
    assert!(sets.iter().all(|s| s.len() == 4));

    // Every family member is genuinely sum-free, maximality is real
    // (checked against a direct exhaustive max for small orders), and
    // |family| ≤ n for every type I cyclic group up to order 30.
    for n in 3..=30u64 {
        let g = GroupSpec::cyclic(n).unwrap();
        if group_type_i(&g).is_none() {
            continue;
        }
        let fam = encode::family::target_family_sumfree_max(&g, 30).unwrap();
        let TargetFamily::ExplicitSets { sets } = &fam else { panic!("expected explicit family") };
        assert!(!sets.is_empty(), "order {n}");
        assert!(sets.len() as u64 <= n, "order {n}: {} sets", sets.len());
        let size = sets[0].len();
        for s in sets {
            assert_eq!(s.len(), size);
            assert!(is_strict_sumfree(&g, s).unwrap());
        }
        if n <= 16 {
            // Full 2^n sweep as the independent maximality oracle.
            let mut best = 0usize;
            let mut best_count = 0usize;
            for mask in 0u32..(1 << n) {
                let set = common::subset_of_mask(n as usize, mask);
                if is_strict_sumfree(&g, &set).unwrap() {
                    use std::cmp::Ordering::*;
                    match set.len().cmp(&best) {
                        Greater => {
                            best = set.len();
                            best_count = 1;
                        }
                        Equal => best_count += 1,
                        Less => {}
                    }
                }
            }
            assert_eq!(size, best, "order {n}");
            assert_eq!(sets.len(), best_count, "order {n}");
        }
    }

    // The guard refuses large orders instead of hanging.
    assert!(encode::family::target_family_sumfree_max(&GroupSpec::cyclic(31).unwrap(), 30)
        .is_err());
}
