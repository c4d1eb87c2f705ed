//! The nine acceptance gates, one test each, every one printing a
//! `[acceptance] C<k>: PASS` / `FAIL` line (visible under --nocapture).
//! Each gate checks the library against hand arithmetic or an independent
//! re-derivation, not against itself; C8 is a seeded regression corridor
//! rather than a theorem, so a corridor breach there means "investigate",
//! and the assert message says so.

use std::panic::AssertUnwindSafe;
use std::process::Command;
use std::time::{Duration, Instant};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use exlab_cli::{
    run_experiment, EncodingRule, ExperimentConfig, PRule, StabilityRule, TrialRecord,
};
use exlab_core::density::{ell_density, is_strictly_balanced, ratio, two_density};
use exlab_core::encode::group::{max_sumfree_sets, mu_max_sumfree_density};
use exlab_core::encode::patterns::{book_3_2, book_4_3, complete_graph, fano};
use exlab_core::encode::{encode_graph_copies, encode_schur, GroupSpec};
use exlab_core::exposure::{solve_schedule, verify_conditional_rounds};
use exlab_core::ledger::{
    check_constraints, eq_r_linear, ConstLogFn, ConstantsLedger,
};
use exlab_core::moments::{chernoff_lower, chernoff_upper, chernoff_upper_small, mu_i_exact};
use exlab_core::solver::{max_free_subset, SolverBudget};
use exlab_core::subset::VertexSubset;
use exlab_core::UniformHypergraph;

fn criterion<F: FnOnce()>(id: u32, body: F) {
    match std::panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("[acceptance] C{id}: PASS"),
        Err(cause) => {
            println!("[acceptance] C{id}: FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}

fn assert_within(elapsed: Duration, limit: Duration, what: &str) {
    assert!(
        elapsed <= limit,
        "{what} took {elapsed:?}, over the {limit:?} budget"
    );
}

// --- C1: the classical bipartite maximum, and a subset-sweep oracle -------

/// Largest edge subset inducing no constraint, by raw 2^|V| enumeration.
fn oracle_max_free(edges: &[Vec<u32>], n_vertices: usize) -> usize {
    assert!(n_vertices <= 20);
    let masks: Vec<u32> = edges
        .iter()
        .map(|e| e.iter().fold(0u32, |m, &v| m | 1 << v))
        .collect();
    let mut best = 0;
    for set in 0u32..(1 << n_vertices) {
        if set.count_ones() as usize > best && masks.iter().all(|&m| m & set != m) {
            best = set.count_ones() as usize;
        }
    }
    best
}

#[test]
fn c1_triangle_free_maxima() {
    criterion(1, || {
        let started = Instant::now();
        let k3 = complete_graph(3).unwrap();
        for n in 3..=8usize {
            let enc = encode_graph_copies(&k3, "k3", n).unwrap();
            let nv = enc.hypergraph.n_vertices();
            let full = VertexSubset::full(nv);
            let r = max_free_subset(&enc, &full, false, SolverBudget::default()).unwrap();
            assert!(r.exact, "n = {n}: solver fell back to its budget");
            assert_eq!(r.size, n * n / 4, "n = {n}");
            if n <= 6 {
                let edges: Vec<Vec<u32>> = enc.hypergraph.edges().map(|e| e.to_vec()).collect();
                assert_eq!(r.size, oracle_max_free(&edges, nv), "oracle disagrees at n = {n}");
            }
        }
        assert_within(started.elapsed(), Duration::from_secs(60), "triangle-free maxima");
    });
}

// --- C2: pattern densities and balancedness, exact rationals --------------

#[test]
fn c2_densities_and_balancedness() {
    criterion(2, || {
        let started = Instant::now();
        let k3 = complete_graph(3).unwrap();
        let k4 = complete_graph(4).unwrap();
        assert_eq!(two_density(&k3).unwrap(), ratio(2, 1));
        assert_eq!(two_density(&k4).unwrap(), ratio(5, 2));
        assert_eq!(ell_density(&fano()).unwrap(), ratio(3, 2));
        assert_eq!(ell_density(&book_3_2()).unwrap(), ratio(1, 1));
        assert_eq!(ell_density(&book_4_3()).unwrap(), ratio(1, 1));
        assert!(is_strictly_balanced(&fano()).unwrap());
        assert!(is_strictly_balanced(&k3).unwrap());
        assert!(!is_strictly_balanced(&book_3_2()).unwrap());
        assert!(!is_strictly_balanced(&book_4_3()).unwrap());
        assert_within(started.elapsed(), Duration::from_secs(5), "density checks");
    });
}

// --- C3: exposure schedules compose exactly -------------------------------

#[test]
fn c3_exposure_schedules() {
    criterion(3, || {
        let started = Instant::now();
        let pinned = solve_schedule(0.19, 2, 1.0).unwrap();
        assert!((pinned.qs[0] - 0.1).abs() <= 1e-12, "q_1 = {}", pinned.qs[0]);

        let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
        for trial in 0..10_000u32 {
            let q = rng.gen_range(0.01..0.99);
            let rounds = rng.gen_range(1..=8usize);
            let growth = rng.gen_range(1.0..4.0);
            let s = solve_schedule(q, rounds, growth).unwrap();
            s.validate().unwrap();
            let residual = (s.union_probability() - q).abs();
            assert!(residual <= 1e-12, "trial {trial}: residual {residual}");
            let floor = q / (rounds as f64 * growth.powi(rounds as i32));
            assert!(
                s.qs[0] >= floor - 1e-12,
                "trial {trial}: q_1 = {} under its floor {floor}",
                s.qs[0]
            );
            let worst = verify_conditional_rounds(&s, 1e-12).unwrap();
            assert!(worst <= 1e-12, "trial {trial}: conditional error {worst}");
        }
        assert_within(started.elapsed(), Duration::from_secs(30), "exposure checks");
    });
}

// --- C4: second moments against the full subset sweep ---------------------

/// E[Σ_v deg_i(v, S_q)²] by enumerating all 2^n subsets.
fn oracle_mu(edges: &[Vec<u32>], n: usize, q: f64, i: usize) -> f64 {
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        let inside = mask.count_ones() as i32;
        let weight = q.powi(inside) * (1.0 - q).powi(n as i32 - inside);
        let mut sum_sq = 0.0;
        for v in 0..n as u32 {
            let d = edges
                .iter()
                .filter(|e| {
                    e.contains(&v)
                        && e.iter().filter(|&&u| u != v && mask >> u & 1 == 1).count() >= i
                })
                .count() as f64;
            sum_sq += d * d;
        }
        total += weight * sum_sq;
    }
    total
}

fn random_edges(rng: &mut ChaCha8Rng, n: usize, k: usize, keep: f64) -> Vec<Vec<u32>> {
    let mut edges = Vec::new();
    let mut combo: Vec<u32> = (0..k as u32).collect();
    loop {
        if rng.gen_bool(keep) {
            edges.push(combo.clone());
        }
        // Next k-combination of {0..n} in lexicographic order.
        let mut j = k;
        while j > 0 && combo[j - 1] == (n - k + j - 1) as u32 {
            j -= 1;
        }
        if j == 0 {
            return edges;
        }
        combo[j - 1] += 1;
        for t in j..k {
            combo[t] = combo[t - 1] + 1;
        }
    }
}

#[test]
fn c4_second_moment_oracle() {
    criterion(4, || {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
        let q_grid = [0.05, 0.3, 0.64, 0.97];
        let mut compared = 0usize;
        for trial in 0..200usize {
            let k = 2 + trial % 3;
            let n = k + 1 + (trial * 7) % (12 - k);
            let edges = random_edges(&mut rng, n, k, 0.45);
            if edges.is_empty() {
                continue;
            }
            let h = UniformHypergraph::new(k, n, edges.clone()).unwrap();
            let q = q_grid[trial % q_grid.len()];
            for i in 0..=k {
                let exact = mu_i_exact(&h, q, i).unwrap();
                let oracle = oracle_mu(&edges, n, q, i);
                let tol = 1e-9 * oracle.abs().max(1.0);
                assert!(
                    (exact - oracle).abs() <= tol,
                    "trial {trial} (n={n}, k={k}, i={i}, q={q}): {exact} vs oracle {oracle}"
                );
                compared += 1;
            }
        }
        assert!(compared >= 500, "only {compared} comparisons ran");

        // One edge on three vertices, i = 1, q = 1/2: each vertex needs at
        // least one of its two partners sampled, so the sum is 3·(3/4).
        let single = UniformHypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let mu = mu_i_exact(&single, 0.5, 1).unwrap();
        assert!((mu - 2.25).abs() < 1e-15, "single-edge value {mu}");
        assert_within(started.elapsed(), Duration::from_secs(120), "second-moment oracle");
    });
}

// --- C5: binomial tail bounds --------------------------------------------

#[test]
fn c5_binomial_tail_bounds() {
    criterion(5, || {
        // The three closed forms, re-typed here independently, across a
        // 100-point grid.
        let ns = [10u64, 40, 160, 640, 2560];
        let ps = [0.05, 0.2, 0.5, 0.8];
        let fracs = [0.1, 0.25, 0.5, 0.75, 1.0];
        let (mut grid_points, mut small_points) = (0, 0);
        for &n in &ns {
            for &p in &ps {
                for &frac in &fracs {
                    let np = n as f64 * p;
                    let a = frac * np;
                    let close = |got: f64, want: f64, what: &str| {
                        assert!(
                            (got - want).abs() <= 1e-15 * want.abs(),
                            "{what} at (n={n}, p={p}, a={a}): {got} vs {want}"
                        );
                    };
                    let lower = chernoff_lower(n, p, a).unwrap();
                    close(lower, (-a * a / (2.0 * np)).exp(), "lower tail");
                    let upper = chernoff_upper(n, p, a).unwrap();
                    close(
                        upper,
                        (-a * a / (2.0 * np) + a * a * a / (2.0 * np * np)).exp(),
                        "upper tail",
                    );
                    if a <= np / 2.0 {
                        let small = chernoff_upper_small(n, p, a).unwrap();
                        close(small, (-a * a / (4.0 * np)).exp(), "small upper tail");
                        small_points += 1;
                    }
                    grid_points += 1;
                }
            }
        }
        assert_eq!(grid_points, 100);
        assert!(small_points >= 60, "only {small_points} small-branch points");

        // Monte Carlo tails of Bin(50, 0.3) stay under each bound plus five
        // standard errors at the bound's own rate.
        let (n, p, trials) = (50u64, 0.3, 100_000u64);
        let np = n as f64 * p;
        let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
        let draws: Vec<u32> = (0..trials)
            .map(|_| (0..n).filter(|_| rng.gen_bool(p)).count() as u32)
            .collect();
        for a in [3.0f64, 5.0, 7.5] {
            let below =
                draws.iter().filter(|&&x| (x as f64) <= np - a).count() as f64 / trials as f64;
            let above =
                draws.iter().filter(|&&x| (x as f64) >= np + a).count() as f64 / trials as f64;
            let slack = |bound: f64| 5.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
            let lower = chernoff_lower(n, p, a).unwrap();
            assert!(below <= lower + slack(lower), "a={a}: below {below} vs bound {lower}");
            let upper = chernoff_upper(n, p, a).unwrap();
            assert!(above <= upper + slack(upper), "a={a}: above {above} vs bound {upper}");
            let small = chernoff_upper_small(n, p, a).unwrap();
            assert!(above <= small + slack(small), "a={a}: above {above} vs bound {small}");
        }
    });
}

// --- C6: strict sum-free ground truth -------------------------------------

#[test]
fn c6_sumfree_ground_truth() {
    criterion(6, || {
        let started = Instant::now();
        for n in [5u64, 8, 11, 14, 20] {
            let group = GroupSpec::cyclic(n).unwrap();
            let enc = encode_schur(&group).unwrap();
            let full = VertexSubset::full(enc.hypergraph.n_vertices());
            let r = max_free_subset(&enc, &full, true, SolverBudget::default()).unwrap();
            assert!(r.exact, "order {n}: solver fell back to its budget");

            // Exact expected size (1/3 + 1/(3q))·n must be an integer here.
            let expected = mu_max_sumfree_density(&group).unwrap()
                * BigRational::from_integer(BigInt::from(n));
            assert!(expected.is_integer(), "order {n}: non-integer expectation");
            assert_eq!(
                BigInt::from(r.size),
                expected.to_integer(),
                "order {n}: solver size {}",
                r.size
            );

            let family = max_sumfree_sets(&group, 30).unwrap();
            assert!(
                family.len() as u64 <= n,
                "order {n}: family of {} sets", family.len()
            );
        }

        let family5 = max_sumfree_sets(&GroupSpec::cyclic(5).unwrap(), 30).unwrap();
        let got: std::collections::BTreeSet<Vec<usize>> =
            family5.iter().map(|s| s.members()).collect();
        let want: std::collections::BTreeSet<Vec<usize>> =
            [vec![1usize, 4], vec![2, 3]].into_iter().collect();
        assert_eq!(got, want);
        assert_within(started.elapsed(), Duration::from_secs(60), "sum-free ground truth");
    });
}

// --- C7: constants ledger against hand arithmetic and exact rationals -----

type Rat = BigRational;

fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// log10 of a positive BigInt via its top 53 bits; error ~1e−15 relative.
fn log10_bigint(n: &BigInt) -> f64 {
    assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap().log10();
    }
    let shift = (bits - 53) as usize;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().log10() + shift as f64 * std::f64::consts::LOG10_2
}

fn log10_rat(x: &Rat) -> f64 {
    log10_bigint(x.numer()) - log10_bigint(x.denom())
}

struct RatLevel {
    xi: Rat,
    b: Rat,
    c: Rat,
    r: Option<u64>,
}

/// The constants recursion replayed in exact rational arithmetic for
/// constant stability/base inputs and a capped round count. Inputs must be
/// exact binary fractions so the float build sees identical parameters.
fn rational_ledger(
    k: usize,
    k_bound: &Rat,
    delta: &Rat,
    eps_stab: &Rat,
    b_hat: &Rat,
    beta: &Rat,
    r_cap: u64,
) -> Vec<RatLevel> {
    let four = rat(4, 1);
    let delta_at = |i: usize| delta / four.pow((k - i) as i32);
    let min3 = |a: Rat, b: Rat, c: Rat| a.min(b).min(c);

    let d0 = delta_at(0);
    let mut levels = vec![RatLevel {
        xi: eps_stab.clone(),
        b: &d0 / rat(32, 1),
        c: Rat::one(),
        r: None,
    }];
    for t in 1..=k {
        let xi_p = levels[t - 1].xi.clone();
        let b_p = levels[t - 1].b.clone();
        let c_p = levels[t - 1].c.clone();

        let x = four.pow(k as i32 + 1) * rat((k * k) as i64, 1) * k_bound / (&xi_p * &xi_p);
        let r_raw: BigInt = x.ceil().to_integer() + 1;
        let r = if r_raw > BigInt::from(r_cap) { r_cap } else { r_raw.to_u64().unwrap() };

        let b_star = min3(beta * &xi_p * &xi_p / rat(256, 1), &b_p / rat(4, 1), b_hat / rat(4, 1));
        let growth = rat(3, 1) / &b_star;
        let inflation = rat(r as i64, 1) * growth.pow(r as i32);

        let xi = &xi_p * &xi_p / (rat(8 * k as i64, 1) * inflation.pow(t as i32));
        let b = (&b_star / (rat(40, 1) * &inflation)).min(&xi_p * &xi_p / rat(256, 1));
        let c = &inflation * &c_p;
        levels.push(RatLevel { xi, b, c, r: Some(r) });
    }
    levels
}

fn assert_log_close(ledger_log10: f64, exact: &Rat, what: &str) {
    assert!(!exact.is_zero(), "{what}: oracle value is zero");
    let oracle_log10 = log10_rat(exact);
    let tol = 1e-9 * oracle_log10.abs().max(1.0);
    assert!(
        (ledger_log10 - oracle_log10).abs() <= tol,
        "{what}: ledger 10^{ledger_log10} vs oracle 10^{oracle_log10}"
    );
}

#[test]
fn c7_constants_ledger() {
    criterion(7, || {
        // Hand arithmetic: ⌈4^4·9·1/0.01⌉ + 1 and ⌈4^4·9·1/1⌉ + 1.
        assert_eq!(eq_r_linear(3, 1.0, 0.1).unwrap().exact, Some(230_401));
        assert_eq!(eq_r_linear(3, 1.0, 1.0).unwrap().exact, Some(2_305));

        // Every built ledger passes its own consistency check; a corrupted
        // copy does not.
        let eps = ConstLogFn::new(0.125).unwrap();
        let bhat = ConstLogFn::new(1.0 / 64.0).unwrap();
        let builds = [
            ConstantsLedger::build(2, 1.0, 0.5, 0.25, &eps, &bhat, 0.5, Some(6)).unwrap(),
            ConstantsLedger::build(3, 1.0, 0.75, 0.0625, &eps, &bhat, 0.5, Some(10)).unwrap(),
            ConstantsLedger::build(4, 4.0, 0.75, 0.25, &eps, &bhat, 0.25, Some(4)).unwrap(),
        ];
        for ledger in &builds {
            let check = check_constraints(ledger).unwrap();
            assert!(check.violations.is_empty(), "violations: {:?}", check.violations);
            assert!(check.checked_equations > 0);
        }
        let mut corrupted = builds[1].clone();
        corrupted.levels[1].xi.log10 += 0.1;
        let err = check_constraints(&corrupted).expect_err("corruption went unnoticed");
        let msg = err.to_string();
        assert!(msg.contains("xi"), "complaint does not name the bad entry: {msg}");

        // Exact-rational replay of the k = 2 capped build. eps_stab is a
        // constant, so level 0's xi is eps regardless of the probe point.
        let oracle = rational_ledger(
            2,
            &Rat::one(),
            &rat(1, 4),
            &rat(1, 8),
            &rat(1, 64),
            &rat(1, 2),
            6,
        );
        let ledger = &builds[0];
        assert_eq!(ledger.levels.len(), oracle.len());
        for (entry, exact) in ledger.levels.iter().zip(&oracle) {
            let lvl = entry.level;
            assert_log_close(entry.xi.log10, &exact.xi, &format!("level {lvl} xi"));
            assert_log_close(entry.b.log10, &exact.b, &format!("level {lvl} b"));
            assert_log_close(entry.c.log10, &exact.c, &format!("level {lvl} C"));
            assert_eq!(entry.step.as_ref().map(|s| s.r.exact), exact.r.map(Some), "level {lvl} R");
        }
    });
}

// --- C8: seeded regression corridor for sampled extremal ratios -----------

#[test]
fn c8_sampled_ratio_corridor() {
    criterion(8, || {
        let config = ExperimentConfig {
            encoding: EncodingRule::Copies { pattern: "k3".into() },
            n_list: vec![40],
            p_rule: PRule::Scaled { c: 5.0 },
            trials: 20,
            seed: 1009,
            strict: false,
            budget: 15_000,
            stability: StabilityRule::Auto,
            records_path: None,
            summary_path: None,
        };
        let mut records_buf = Vec::new();
        let mut summary_buf = Vec::new();
        run_experiment(&config, 0, &mut records_buf, &mut summary_buf).unwrap();
        let records: Vec<TrialRecord> = String::from_utf8(records_buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(records.len(), 20);

        let mut near_family = 0;
        for r in &records {
            assert!(
                (0.50..=0.85).contains(&r.ratio),
                "trial {}: ratio {} left the regression corridor [0.50, 0.85] — \
                 investigate the solver/sampler before touching this gate",
                r.trial,
                r.ratio
            );
            let d = r.distance.expect("bipartition family is canonical here");
            if (d as f64) < 0.2 * r.sampled_size as f64 {
                near_family += 1;
            }
        }
        assert!(
            near_family >= 15,
            "only {near_family} of 20 witnesses sat near the bipartite family — \
             investigate before touching this gate"
        );
    });
}

// --- C9: byte-identical reruns across thread counts -----------------------

#[test]
fn c9_deterministic_across_threads() {
    criterion(9, || {
        let exe = env!("CARGO_BIN_EXE_exlab");
        let dir = std::env::temp_dir().join(format!("exlab-c9-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let config_path = dir.join("config.json");
        std::fs::write(
            &config_path,
            r#"{
  "encoding": {"kind": "copies", "pattern": "k3"},
  "n_list": [12, 16],
  "p_rule": {"rule": "scaled", "c": 2.5},
  "trials": 10,
  "seed": 424242,
  "budget": 20000,
  "stability": "auto"
}"#,
        )
        .unwrap();

        let run = |threads: u32, tag: &str| {
            let records = dir.join(format!("records-{tag}.jsonl"));
            let summary = dir.join(format!("summary-{tag}.csv"));
            let output = Command::new(exe)
                .args([
                    "experiment",
                    "run",
                    "--config",
                    config_path.to_str().unwrap(),
                    "--threads",
                    &threads.to_string(),
                    "--records",
                    records.to_str().unwrap(),
                    "--summary",
                    summary.to_str().unwrap(),
                ])
                .output()
                .unwrap();
            let code = output.status.code().unwrap_or(-1);
            assert!(
                code == 0 || code == 3,
                "exit {code}: {}",
                String::from_utf8_lossy(&output.stderr)
            );
            (std::fs::read(records).unwrap(), std::fs::read(summary).unwrap())
        };

        let (r1, s1) = run(1, "t1");
        let (r8, s8) = run(8, "t8");
        assert!(!r1.is_empty() && !s1.is_empty());
        assert_eq!(r1, r8, "records differ between 1 and 8 threads");
        assert_eq!(s1, s8, "summaries differ between 1 and 8 threads");

        std::fs::remove_dir_all(&dir).ok();
    });
}
