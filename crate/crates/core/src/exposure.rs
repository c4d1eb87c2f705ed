//! Multi-round exposure schedules.
//!
//! A q-random subset is revealed in R rounds with geometrically growing
//! per-round probabilities q_{s+1} = L·q_s, tied together by
//! 1 - q = ∏_s (1 - q_s). Solving for q_1 pins the whole schedule; the
//! product is evaluated with the same iterative recurrence used to build
//! the rounds so the stored values satisfy the defining identity bit for
//! bit.

use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::subset::VertexSubset;

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ExposureSchedule {
    pub q: f64,
    pub rounds: usize,
    pub growth: f64,
    /// Per-round probabilities q_1 < q_2 < … < q_R (for growth > 1).
    pub qs: Vec<f64>,
}

/// Residual of the defining identity at first-round probability q1:
/// ∏ (1 - L^{s-1} q1) - (1 - q), evaluated iteratively.
fn residual(q: f64, rounds: usize, growth: f64, q1: f64) -> f64 {
    let mut prod = 1.0;
    let mut qs = q1;
    for s in 0..rounds {
        if s > 0 {
            qs *= growth;
        }
        prod *= 1.0 - qs;
    }
    prod - (1.0 - q)
}

/// Solve for the unique q_1 making R rounds of growth L compose to overall
/// probability q. The residual is strictly decreasing in q_1 on the valid
/// range, so plain bisection suffices.
pub fn solve_schedule(q: f64, rounds: usize, growth: f64) -> Result<ExposureSchedule> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q={q} must lie in (0,1)")));
    }
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be >= 1".into()));
    }
    if !(growth >= 1.0) {
        return Err(Error::InvalidParameter(format!("growth L={growth} must be >= 1")));
    }
    let qs = if rounds == 1 {
        vec![q]
    } else {
        // Every round must stay a probability: q_R = L^{R-1} q_1 < 1.
        let cap = growth.powi(-(rounds as i32 - 1));
        let mut lo = 0.0f64;
        let mut hi = cap.min(1.0);
        // residual(lo) = q > 0, residual at hi ≤ -(1-q)·0 … ≤ 0 since the
        // last factor vanishes (or the product is below 1-q already).
        if residual(q, rounds, growth, hi) > 0.0 {
            return Err(Error::InfeasibleSchedule(format!(
                "no q1 in (0,{hi}) composes to q={q} with R={rounds}, L={growth}"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(q, rounds, growth, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q1 = 0.5 * (lo + hi);
        let mut v = Vec::with_capacity(rounds);
        let mut cur = q1;
        for s in 0..rounds {
            if s > 0 {
                cur *= growth;
            }
            v.push(cur);
        }
        v
    };
    let schedule = ExposureSchedule { q, rounds, growth, qs };
    schedule.validate()?;
    Ok(schedule)
}

impl ExposureSchedule {
    /// Re-check every defining property; used both after solving and on
    /// schedules deserialized from elsewhere.
    pub fn validate(&self) -> Result<()> {
        if self.qs.len() != self.rounds || self.rounds == 0 {
            return Err(Error::InfeasibleSchedule("round count mismatch".into()));
        }
        for (s, &qs) in self.qs.iter().enumerate() {
            if !(qs > 0.0 && qs < 1.0) && !(self.rounds == 1 && qs == self.q) {
                return Err(Error::InfeasibleSchedule(format!(
                    "round {} probability {qs} outside (0,1)",
                    s + 1
                )));
            }
        }
        for s in 1..self.rounds {
            let expect = self.qs[s - 1] * self.growth;
            if (self.qs[s] - expect).abs() > 1e-12 * expect.max(1e-300) {
                return Err(Error::InfeasibleSchedule(format!(
                    "round {} breaks the growth recurrence",
                    s + 1
                )));
            }
        }
        let prod: f64 = self.qs.iter().map(|&x| 1.0 - x).product();
        if (prod - (1.0 - self.q)).abs() > 1e-12 {
            return Err(Error::InfeasibleSchedule(format!(
                "composition residual {} exceeds 1e-12",
                prod - (1.0 - self.q)
            )));
        }
        // q_1 can be small but not unboundedly so: q_1 ≥ q / (R L^R).
        let floor = self.q / (self.rounds as f64 * self.growth.powi(self.rounds as i32));
        if self.qs[0] < floor {
            return Err(Error::InfeasibleSchedule(format!(
                "q1={} fell below q/(R L^R)={floor}",
                self.qs[0]
            )));
        }
        Ok(())
    }

    /// Union membership probability 1 - ∏(1 - q_s); equals q up to the
    /// solver tolerance.
    pub fn union_probability(&self) -> f64 {
        1.0 - self.qs.iter().map(|&x| 1.0 - x).product::<f64>()
    }

    /// P(fixed element ∈ round s | element ∈ union) = q_s/q: round s is a
    /// subset of the union, so the joint probability is just q_s.
    pub fn conditional_round_probability(&self, s: usize) -> Result<f64> {
        if s == 0 || s > self.rounds {
            return Err(Error::InvalidParameter(format!(
                "round {s} outside 1..={}",
                self.rounds
            )));
        }
        Ok(self.qs[s - 1] / self.q)
    }
}

/// Draw the R rounds as independent subsets; the overall exposure is their
/// union. Round s gets its own substream (seed, s), so prefixes agree
/// across runs with different R.
pub fn sample_multiround(
    schedule: &ExposureSchedule,
    universe: usize,
    seed: u64,
) -> Result<(Vec<VertexSubset>, VertexSubset)> {
    schedule.validate()?;
    let mut rounds = Vec::with_capacity(schedule.rounds);
    let mut union = VertexSubset::empty(universe);
    for (s, &qs) in schedule.qs.iter().enumerate() {
        let mut rng = rng_from_seed(derive_seed(seed, &[s as u64 + 1]));
        let sub = VertexSubset::sample_bernoulli(universe, qs, &mut rng)?;
        union = union.union(&sub)?;
        rounds.push(sub);
    }
    Ok((rounds, union))
}

/// Which vertices of the claim-star center's neighbourhood a round is
/// allowed to test.
#[derive(Clone, Debug)]
pub enum WitnessSelector {
    All,
    /// Keep the fraction of target vertices with the lowest identifiers —
    /// a stand-in for "low degree after earlier rounds".
    LowestFraction(f64),
}

#[derive(Clone, Debug)]
pub struct ClaimStarParams {
    /// Per-round per-target survival requirement: at least gamma·q_s·|T|
    /// target members must appear in round s.
    pub gamma: f64,
    /// Slack multiplier on the requirement before a round counts as failed.
    pub slack: f64,
    pub targets: Vec<VertexSubset>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ClaimStarReport {
    pub trials: u64,
    /// Per-round count of trials in which some target missed its quota.
    pub round_failures: Vec<u64>,
    /// Fraction of trials in which every round met every quota.
    pub all_rounds_ok: f64,
}

/// Monte Carlo check that every exposure round delivers its expected share
/// of every target set. With no targets the claim is vacuous and the
/// frequency is 1.
pub fn claim_star_probe(
    universe: usize,
    schedule: &ExposureSchedule,
    selector: &WitnessSelector,
    params: &ClaimStarParams,
    trials: u64,
    seed: u64,
) -> Result<ClaimStarReport> {
    schedule.validate()?;
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if !(params.gamma > 0.0 && params.gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma={} outside (0,1]",
            params.gamma
        )));
    }
    if !(params.slack > 0.0) {
        return Err(Error::InvalidParameter("slack must be positive".into()));
    }
    for t in &params.targets {
        if t.universe() != universe {
            return Err(Error::UniverseMismatch { left: universe, right: t.universe() });
        }
    }
    let targets: Vec<VertexSubset> = match selector {
        WitnessSelector::All => params.targets.clone(),
        WitnessSelector::LowestFraction(f) => {
            if !(*f > 0.0 && *f <= 1.0) {
                return Err(Error::InvalidParameter(format!("fraction {f} outside (0,1]")));
            }
            params
                .targets
                .iter()
                .map(|t| {
                    let members = t.members();
                    let keep = ((members.len() as f64 * f).ceil() as usize).max(1).min(members.len());
                    VertexSubset::from_members(universe, members[..keep].iter().copied())
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut round_failures = vec![0u64; schedule.rounds];
    let mut ok_trials = 0u64;
    for trial in 0..trials {
        let trial_seed = derive_seed(seed, &[trial]);
        let mut all_ok = true;
        for (s, &qs) in schedule.qs.iter().enumerate() {
            let mut rng = rng_from_seed(derive_seed(trial_seed, &[s as u64 + 1]));
            let round = VertexSubset::sample_bernoulli(universe, qs, &mut rng)?;
            let mut round_ok = true;
            for t in &targets {
                if t.is_empty() {
                    continue;
                }
                let hit = round.intersection_len(t)? as f64;
                let quota = params.gamma * qs * t.len() as f64 / params.slack;
                if hit < quota {
                    round_ok = false;
                    break;
                }
            }
            if !round_ok {
                round_failures[s] += 1;
                all_ok = false;
            }
        }
        if all_ok {
            ok_trials += 1;
        }
    }
    Ok(ClaimStarReport {
        trials,
        round_failures,
        all_rounds_ok: ok_trials as f64 / trials as f64,
    })
}

/// Exact check for small R: enumerate the 2^R round-membership patterns of
/// a single element and compare P(∈ round s | ∈ union) against q_s/q for
/// every s. Returns the worst deviation; errors if it exceeds `tol`.
pub fn verify_conditional_rounds(schedule: &ExposureSchedule, tol: f64) -> Result<f64> {
    schedule.validate()?;
    if schedule.rounds > 20 {
        return Err(Error::Unsupported(format!(
            "exact round enumeration capped at R=20, got {}",
            schedule.rounds
        )));
    }
    let r = schedule.rounds;
    let mut round_mass = vec![0.0f64; r];
    let mut union_mass = 0.0f64;
    for mask in 1u32..(1u32 << r) {
        let mut prob = 1.0;
        for (s, &qs) in schedule.qs.iter().enumerate() {
            prob *= if mask >> s & 1 == 1 { qs } else { 1.0 - qs };
        }
        union_mass += prob;
        for (s, mass) in round_mass.iter_mut().enumerate() {
            if mask >> s & 1 == 1 {
                *mass += prob;
            }
        }
    }
    let mut worst = 0.0f64;
    for s in 1..=r {
        let exact = round_mass[s - 1] / union_mass;
        let claimed = schedule.conditional_round_probability(s)?;
        worst = worst.max((exact - claimed).abs());
    }
    if worst > tol {
        return Err(Error::InfeasibleSchedule(format!(
            "conditional round distribution off by {worst} (> {tol})"
        )));
    }
    Ok(worst)
}

/// Weak-round count R = ⌈4^{k+1} k² K / ξ'² + 1⌉ used by schedule-driven
/// constructions.
pub fn round_count(k: usize, k_bound: f64, xi_prime: f64) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be >= 2".into()));
    }
    if !(k_bound > 0.0) || !(xi_prime > 0.0) {
        return Err(Error::InvalidParameter("K and xi' must be positive".into()));
    }
    let raw = 4f64.powi(k as i32 + 1) * (k * k) as f64 * k_bound / (xi_prime * xi_prime) + 1.0;
    if !raw.is_finite() || raw >= u64::MAX as f64 {
        return Err(Error::InvalidParameter("round count overflows u64".into()));
    }
    Ok(raw.ceil() as u64)
}
