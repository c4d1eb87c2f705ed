//! Tail bounds and the second-moment functional μ_i.
//!
//! μ_i(H,q) is the expected value, over a q-random vertex subset V_q, of
//! Σ_v deg_i(v, V_q)². The exact evaluator decomposes the square into
//! ordered pairs of incident edges: for edges e, f ∋ v the joint event
//! (|e ∩ (V_q∖{v})| ≥ i, |f ∩ (V_q∖{v})| ≥ i) depends only on how many of
//! the t shared and m = k-1-t private vertices of each side are sampled, so
//! its probability is an exact small binomial sum — the same enumeration as
//! summing the 2^|e∪f∖{v}| inclusion states, grouped by counts. The full
//! 2^n enumeration exists only as a test oracle.

use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;
use crate::seeding::{derive_seed, rng_from_seed};
use crate::subset::VertexSubset;

/// Compensated (Kahan) accumulator for long sums of small terms.
#[derive(Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

fn check_np(n: u64, p: f64, a: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p={p} outside [0,1]")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("deviation a={a} must be positive")));
    }
    Ok(())
}

/// True when np = 0, i.e. the binomial is deterministic and every bound
/// below degenerates to 0.
pub fn chernoff_degenerate(n: u64, p: f64) -> bool {
    n == 0 || p == 0.0
}

/// Bound on P(Bin(n,p) ≤ np − a): exp(−a²/(2np)).
pub fn chernoff_lower(n: u64, p: f64, a: f64) -> Result<f64> {
    check_np(n, p, a)?;
    let np = n as f64 * p;
    if np == 0.0 {
        return Ok(0.0);
    }
    Ok((-a * a / (2.0 * np)).exp())
}

/// Bound on P(Bin(n,p) ≥ np + a): exp(−a²/(2np) + a³/(2(np)²)).
pub fn chernoff_upper(n: u64, p: f64, a: f64) -> Result<f64> {
    check_np(n, p, a)?;
    let np = n as f64 * p;
    if np == 0.0 {
        return Ok(0.0);
    }
    Ok((-a * a / (2.0 * np) + a.powi(3) / (2.0 * np * np)).exp())
}

/// Bound on P(Bin(n,p) ≥ np + a) valid only for a ≤ np/2: exp(−a²/(4np)).
pub fn chernoff_upper_small(n: u64, p: f64, a: f64) -> Result<f64> {
    check_np(n, p, a)?;
    let np = n as f64 * p;
    if a > np / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "exp(-a^2/4np) requires a <= np/2; a={a}, np/2={}",
            np / 2.0
        )));
    }
    Ok((-a * a / (4.0 * np)).exp())
}

/// Binomial pmf vector for Bin(n,q), exact products (n stays tiny here).
fn binom_pmf(n: usize, q: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    for (j, slot) in pmf.iter_mut().enumerate() {
        let mut c = 1.0;
        for r in 0..j {
            c = c * (n - r) as f64 / (r + 1) as f64;
        }
        *slot = c * q.powi(j as i32) * (1.0 - q).powi((n - j) as i32);
    }
    pmf
}

/// P(s + a ≥ i and s + b ≥ i) with s ~ Bin(t,q), a,b ~ Bin(m,q) independent;
/// this is the joint threshold probability for one ordered pair of incident
/// edges sharing t non-center vertices, where m = k - 1 - t.
fn pair_probability(k: usize, i: usize, q: f64, t: usize) -> f64 {
    let m = k - 1 - t;
    let ps = binom_pmf(t, q);
    let pa = binom_pmf(m, q);
    // tail[j] = P(Bin(m,q) >= j).
    let mut tail = vec![0.0; m + 2];
    for j in (0..=m).rev() {
        tail[j] = tail[j + 1] + pa[j];
    }
    let mut p = 0.0;
    for (s, &ps_s) in ps.iter().enumerate() {
        let need = i.saturating_sub(s);
        let t_need = if need > m { 0.0 } else { tail[need] };
        p += ps_s * t_need * t_need;
    }
    p
}

fn sorted_intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

fn check_q_i(h: &UniformHypergraph, q: f64, i: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("q={q} outside [0,1]")));
    }
    if i > h.k() {
        return Err(Error::LevelOutOfRange { level: i, k: h.k() });
    }
    Ok(())
}

/// Exact μ_i(H,q) by pair decomposition.
pub fn mu_i_exact(h: &UniformHypergraph, q: f64, i: usize) -> Result<f64> {
    check_q_i(h, q, i)?;
    let k = h.k();
    let pair_prob: Vec<f64> = (0..k).map(|t| pair_probability(k, i, q, t)).collect();
    let mut sum = KahanSum::default();
    for v in 0..h.n_vertices() {
        let inc = h.incident(v);
        for &ei in inc {
            let e = h.edge(ei as usize);
            for &fi in inc {
                let f = h.edge(fi as usize);
                let t = sorted_intersection_size(e, f) - 1;
                sum.add(pair_prob[t]);
            }
        }
    }
    Ok(sum.value())
}

/// Σ_v deg_i(v, s)² for a concrete subset.
pub fn sum_deg_i_sq(h: &UniformHypergraph, s: &VertexSubset, i: usize) -> Result<f64> {
    let mut total = KahanSum::default();
    for v in 0..h.n_vertices() {
        let d = h.deg_i(v, i, s)? as f64;
        total.add(d * d);
    }
    Ok(total.value())
}

/// Monte Carlo estimate of μ_i with standard error. Each trial draws its own
/// substream from (seed, trial index), so the estimate is independent of
/// evaluation order and thread count.
pub fn mu_i_mc(
    h: &UniformHypergraph,
    q: f64,
    i: usize,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_q_i(h, q, i)?;
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for t in 0..trials {
        let mut rng = rng_from_seed(derive_seed(seed, &[t]));
        let s = VertexSubset::sample_bernoulli(h.n_vertices(), q, &mut rng)?;
        let x = sum_deg_i_sq(h, &s, i)?;
        let count = (t + 1) as f64;
        let d1 = x - mean;
        mean += d1 / count;
        m2 += d1 * (x - mean);
    }
    let se = if trials > 1 {
        (m2 / (trials as f64 * (trials - 1) as f64)).sqrt()
    } else {
        0.0
    };
    Ok((mean, se))
}

/// Pointwise comparison of μ_i against the bounding unit q^{2i}|H|²/|V|
/// over a probability grid.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundednessReport {
    pub i: usize,
    pub q_grid: Vec<f64>,
    pub mu_exact: Vec<f64>,
    pub rhs_unit: Vec<f64>,
    pub ratios: Vec<f64>,
    /// max of ratios; the smallest K that bounds this hypergraph on this grid.
    pub k_min: Option<f64>,
    /// |H| = 0 (or no vertices): ratios are undefined rather than infinite.
    pub degenerate: bool,
}

pub fn boundedness_report(
    h: &UniformHypergraph,
    p: f64,
    i: usize,
    q_grid: &[f64],
) -> Result<BoundednessReport> {
    if q_grid.is_empty() {
        return Err(Error::InvalidParameter("q grid must be nonempty".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p={p} outside [0,1]")));
    }
    for &q in q_grid {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidParameter(format!("grid value q={q} outside (0,1]")));
        }
        if q < p {
            return Err(Error::InvalidParameter(format!(
                "grid value q={q} below p={p}; boundedness quantifies over q >= p"
            )));
        }
    }
    check_q_i(h, q_grid[0], i)?;
    let m = h.edge_count() as f64;
    let nv = h.n_vertices() as f64;
    let degenerate = h.edge_count() == 0 || h.n_vertices() == 0;
    let mut mu_exact = Vec::with_capacity(q_grid.len());
    let mut rhs_unit = Vec::with_capacity(q_grid.len());
    let mut ratios = Vec::new();
    let mut k_min: Option<f64> = None;
    for &q in q_grid {
        let mu = mu_i_exact(h, q, i)?;
        let rhs = if degenerate { 0.0 } else { q.powi(2 * i as i32) * m * m / nv };
        mu_exact.push(mu);
        rhs_unit.push(rhs);
        if !degenerate {
            let ratio = mu / rhs;
            ratios.push(ratio);
            if k_min.is_none_or(|k| ratio > k) {
                k_min = Some(ratio);
            }
        }
    }
    Ok(BoundednessReport { i, q_grid: q_grid.to_vec(), mu_exact, rhs_unit, ratios, k_min, degenerate })
}

/// One greedy deleted-set experiment.
#[derive(Clone, Debug, serde::Serialize)]
pub struct UpperTailProbe {
    pub trials: u64,
    pub successes: u64,
    pub frequency: f64,
    /// 4^k k² K q^{2i} |H|²/|V|: the surviving-sum target.
    pub threshold: f64,
    /// ⌊η q |V|⌋ deletions allowed per trial.
    pub deletion_budget: usize,
}

/// Estimate how often a greedily chosen deleted set X (|X| ≤ ηq|V|) brings
/// Σ_v deg_i(v, V_q∖X)² below 4^k k² K q^{2i}|H|²/|V|.
///
/// Greedy-by-largest-reduction is a heuristic: failure does not falsify the
/// existence of a good X, so the frequency is a diagnostic lower bound.
pub fn upper_tail_probe(
    h: &UniformHypergraph,
    q: f64,
    i: usize,
    eta: f64,
    k_bound: f64,
    trials: u64,
    seed: u64,
) -> Result<UpperTailProbe> {
    check_q_i(h, q, i)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta={eta} must be positive")));
    }
    if !(k_bound > 0.0) {
        return Err(Error::InvalidParameter(format!("K={k_bound} must be positive")));
    }
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if h.n_vertices() == 0 {
        return Err(Error::InvalidParameter("hypergraph has no vertices".into()));
    }
    let k = h.k();
    let nv = h.n_vertices() as f64;
    let m = h.edge_count() as f64;
    let threshold =
        4f64.powi(k as i32) * (k * k) as f64 * k_bound * q.powi(2 * i as i32) * m * m / nv;
    let deletion_budget = (eta * q * nv).floor() as usize;

    let mut successes = 0u64;
    for t in 0..trials {
        let mut rng = rng_from_seed(derive_seed(seed, &[t]));
        let mut cur = VertexSubset::sample_bernoulli(h.n_vertices(), q, &mut rng)?;
        let mut total = sum_deg_i_sq(h, &cur, i)?;
        let mut deleted = 0usize;
        while total > threshold && deleted < deletion_budget {
            // Remove the vertex whose deletion reduces the sum the most;
            // only vertices that meet an edge can change anything.
            let mut best: Option<(f64, usize)> = None;
            for u in cur.members() {
                if h.incident(u).is_empty() {
                    continue;
                }
                let new_total = removal_result(h, &mut cur, i, u, total)?;
                let better = match best {
                    None => true,
                    Some((bt, _)) => new_total < bt,
                };
                if better {
                    best = Some((new_total, u));
                }
            }
            match best {
                Some((new_total, u)) => {
                    cur.remove(u)?;
                    total = new_total;
                    deleted += 1;
                }
                None => break,
            }
        }
        if total <= threshold {
            successes += 1;
        }
    }
    Ok(UpperTailProbe {
        trials,
        successes,
        frequency: successes as f64 / trials as f64,
        threshold,
        deletion_budget,
    })
}

/// Total Σ_v deg_i(v,·)² after removing u, computed from the old total by
/// re-evaluating only the vertices of edges through u (the only terms that
/// can change).
fn removal_result(
    h: &UniformHypergraph,
    cur: &mut VertexSubset,
    i: usize,
    u: usize,
    old_total: f64,
) -> Result<f64> {
    let mut affected: Vec<usize> = h
        .incident(u)
        .iter()
        .flat_map(|&ei| h.edge(ei as usize).iter().map(|&v| v as usize))
        .collect();
    affected.sort_unstable();
    affected.dedup();
    let mut before = 0.0;
    for &v in &affected {
        let d = h.deg_i(v, i, cur)? as f64;
        before += d * d;
    }
    cur.remove(u)?;
    let mut after = 0.0;
    for &v in &affected {
        let d = h.deg_i(v, i, cur)? as f64;
        after += d * d;
    }
    cur.insert(u)?;
    Ok(old_total - before + after)
}
