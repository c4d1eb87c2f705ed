//! Second-moment functionals and tail bounds against enumeration oracles.
//!
//! μ_i(H, q) is computed in the library through the pair decomposition over
//! ordered incident edge pairs; the oracle here takes the definition at its
//! word and sums Σ_v deg_i(v, S)² over all 2^n outcomes S of the q-sample,
//! with deg_i recomputed naively per subset.

mod common;

use common::*;
use exlab_core::moments::{
    boundedness_report, chernoff_lower, chernoff_upper, chernoff_upper_small, mu_i_exact,
    mu_i_mc,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn exact_moment_matches_subset_oracle_on_random_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let qs = [0.05, 0.3, 0.64, 0.97];
    let mut checked = 0usize;
    for trial in 0..60 {
        let k = 2 + trial % 3;
        let n = k + 1 + (trial * 7) % (12 - k);
        let h = random_hypergraph(&mut rng, n, k, 0.45);
        for i in 0..=k {
            let q = qs[trial % qs.len()];
            let exact = mu_i_exact(&h, q, i).unwrap();
            let oracle = naive_mu_i(&h, q, i);
            assert!(
                (exact - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
                "n={n} k={k} i={i} q={q}: {exact} vs {oracle}"
            );
            checked += 1;
        }
    }
    assert!(checked > 200);
}

#[test]
fn moment_monotonicity_in_level_and_sample_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0011);
    for _ in 0..10 {
        let h = random_hypergraph(&mut rng, 9, 3, 0.4);
        // Non-increasing in i at fixed q.
        for &q in &[0.2, 0.7] {
            let vals: Vec<f64> = (0..=3).map(|i| mu_i_exact(&h, q, i).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
        // Non-decreasing in q at fixed i ≥ 1.
        for i in 1..=3 {
            let grid: Vec<f64> =
                [0.1, 0.3, 0.5, 0.8, 1.0].iter().map(|&q| mu_i_exact(&h, q, i).unwrap()).collect();
            for w in grid.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }
}

#[test]
fn monte_carlo_moment_agrees_with_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0012);
    let h = random_hypergraph(&mut rng, 11, 3, 0.35);
    for &(i, q) in &[(1usize, 0.25), (2, 0.6)] {
        let exact = mu_i_exact(&h, q, i).unwrap();
        let (mean, se) = mu_i_mc(&h, q, i, 4000, 99).unwrap();
        assert!(
            (mean - exact).abs() <= 4.0 * se.max(1e-9),
            "i={i} q={q}: mc {mean} ± {se} vs exact {exact}"
        );
    }
}

/// Empirical Bin(n,p) tail frequencies never beat the stated bounds.
/// 10^5 trials per grid point; the comparison allows 5σ of simulation
/// noise on top of the bound itself.
#[test]
fn chernoff_bounds_dominate_binomial_tails() {
    let trials = 100_000u32;
    let mut grid_points = 0usize;
    for &(n, p) in &[(40u32, 0.2f64), (60, 0.5), (100, 0.08)] {
        let np = n as f64 * p;
        for &a_frac in &[0.25, 0.5, 1.0] {
            let a = (np * a_frac).max(1.0).floor();
            let mut rng = ChaCha8Rng::seed_from_u64(0xc4e2 ^ (n as u64) << 8 ^ a as u64);
            let (mut below, mut above) = (0u32, 0u32);
            for _ in 0..trials {
                let x = (0..n).filter(|_| rng.gen::<f64>() < p).count() as f64;
                if x <= np - a {
                    below += 1;
                }
                if x >= np + a {
                    above += 1;
                }
            }
            let slack = |bound: f64| {
                // 5σ of the frequency estimator at the bound's own rate.
                5.0 * (bound.max(1e-12) * (1.0 - bound).max(0.0) / trials as f64).sqrt()
            };
            let lower = chernoff_lower(n as u64, p, a).unwrap();
            assert!(
                below as f64 / trials as f64 <= lower + slack(lower),
                "lower tail n={n} p={p} a={a}"
            );
            let upper = chernoff_upper(n as u64, p, a).unwrap();
            assert!(
                above as f64 / trials as f64 <= upper + slack(upper),
                "upper tail n={n} p={p} a={a}"
            );
            if a <= np / 2.0 {
                let small = chernoff_upper_small(n as u64, p, a).unwrap();
                assert!(
                    above as f64 / trials as f64 <= small + slack(small),
                    "small-deviation upper tail n={n} p={p} a={a}"
                );
                grid_points += 1;
            }
        }
    }
    assert!(grid_points >= 6, "small-deviation branch barely exercised");
}

#[test]
fn boundedness_ratio_matches_direct_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0013);
    let h = random_hypergraph(&mut rng, 10, 3, 0.4);
    let p = 0.2;
    let grid = [0.2, 0.4, 0.8];
    let report = boundedness_report(&h, p, 2, &grid).unwrap();
    let m = h.edge_count() as f64;
    let nv = h.n_vertices() as f64;
    for (j, &q) in grid.iter().enumerate() {
        let mu = mu_i_exact(&h, q, 2).unwrap();
        assert!((report.mu_exact[j] - mu).abs() <= 1e-12 * mu.max(1.0));
        let rhs_unit = q.powi(4) * m * m / nv;
        assert!((report.rhs_unit[j] - rhs_unit).abs() <= 1e-12 * rhs_unit.max(1.0));
        assert!((report.ratios[j] - mu / rhs_unit).abs() <= 1e-9 * (mu / rhs_unit).max(1.0));
    }
    // K_min is the max ratio: with that K every grid point is bounded.
    let k_min = report.k_min.unwrap();
    for &r in &report.ratios {
        assert!(r <= k_min * (1.0 + 1e-12));
    }
    assert!(report.ratios.iter().any(|&r| (r - k_min).abs() <= 1e-12 * k_min));
}
