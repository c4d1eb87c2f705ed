//! Distances from a witness set to a target family, and a searcher for
//! stability counterexamples.
//!
//! Distance to an explicit family is a minimum of set differences and is
//! always exact. Distance to a partition-defined family minimizes, over
//! assignments of the base points to parts, the number of witness members
//! whose part-count pattern is not allowed; that is exact only while the
//! assignment space fits under a guard, and a flagged local-search upper
//! bound beyond it.

use crate::encode::{Encoding, PartiteFamily, TargetFamily, VertexMeaning};
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::subset::VertexSubset;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Debug, serde::Serialize)]
pub enum NearestTarget {
    /// Index into the explicit family.
    FamilyIndex(usize),
    /// Point-to-part assignment realizing the distance.
    Partition(Vec<u8>),
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct StabilityDistance {
    pub distance: usize,
    pub nearest: NearestTarget,
    pub exact: bool,
}

/// min_B |W∖B| over an explicit family; exact by direct enumeration.
pub fn family_distance(w: &VertexSubset, sets: &[VertexSubset]) -> Result<StabilityDistance> {
    if sets.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best: Option<(usize, usize)> = None;
    for (i, b) in sets.iter().enumerate() {
        let d = w.difference_len(b)?;
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    let (distance, idx) = best.expect("family checked nonempty");
    Ok(StabilityDistance { distance, nearest: NearestTarget::FamilyIndex(idx), exact: true })
}

#[derive(Clone, Copy, Debug)]
pub struct PartitionSearchOpts {
    /// Exhaustive enumeration whenever parts^points stays at or below this.
    pub exhaustive_limit: u64,
    /// Local-search restarts past the guard.
    pub restarts: u32,
    pub seed: u64,
}

impl Default for PartitionSearchOpts {
    fn default() -> Self {
        PartitionSearchOpts { exhaustive_limit: 2_000_000, restarts: 32, seed: 0 }
    }
}

/// The base points of each member of W, in W's member order.
fn member_points(w: &VertexSubset, enc: &Encoding) -> Result<Vec<Vec<u32>>> {
    if w.universe() != enc.hypergraph.n_vertices() {
        return Err(Error::UniverseMismatch {
            left: enc.hypergraph.n_vertices(),
            right: w.universe(),
        });
    }
    w.members()
        .into_iter()
        .map(|v| match &enc.vertex_meaning[v] {
            VertexMeaning::BaseSet { points } => Ok(points.clone()),
            other => Err(Error::Unsupported(format!(
                "partition distance needs point-set vertices, vertex {v} is {other:?}"
            ))),
        })
        .collect()
}

struct PartitionProblem<'a> {
    family: &'a PartiteFamily,
    /// Points of each W-member.
    members: Vec<Vec<u32>>,
    /// Member ids listed by the largest point they contain (so a member is
    /// scored exactly once, at the moment its last point gets a part).
    decided_at: Vec<Vec<u32>>,
}

impl<'a> PartitionProblem<'a> {
    fn new(family: &'a PartiteFamily, members: Vec<Vec<u32>>) -> Result<Self> {
        let mut decided_at: Vec<Vec<u32>> = vec![Vec::new(); family.points];
        for (i, pts) in members.iter().enumerate() {
            let last = pts
                .iter()
                .max()
                .ok_or_else(|| Error::InvalidParameter("empty member point set".into()))?;
            if *last as usize >= family.points {
                return Err(Error::VertexOutOfRange {
                    vertex: *last as usize,
                    universe: family.points,
                });
            }
            decided_at[*last as usize].push(i as u32);
        }
        Ok(PartitionProblem { family, members, decided_at })
    }

    fn violations(&self, assign: &[u8]) -> usize {
        self.members
            .iter()
            .filter(|pts| !self.family.allows(&self.family.pattern_of(pts, assign)))
            .count()
    }

    /// Depth-first over restricted-growth assignments (parts are
    /// interchangeable because patterns are sorted counts), pruning when the
    /// partial violation count already ties the best.
    fn exhaustive(&self) -> (usize, Vec<u8>) {
        let points = self.family.points;
        let mut assign = vec![0u8; points];
        let mut best = (usize::MAX, vec![0u8; points]);
        self.dfs(0, 0, 0, &mut assign, &mut best);
        best
    }

    fn dfs(
        &self,
        depth: usize,
        used_parts: u8,
        viol: usize,
        assign: &mut Vec<u8>,
        best: &mut (usize, Vec<u8>),
    ) {
        if viol >= best.0 {
            return;
        }
        if depth == self.family.points {
            *best = (viol, assign.clone());
            return;
        }
        let cap = (used_parts + 1).min(self.family.parts as u8);
        for part in 0..cap {
            assign[depth] = part;
            let mut v2 = viol;
            for &mi in &self.decided_at[depth] {
                let pts = &self.members[mi as usize];
                if !self.family.allows(&self.family.pattern_of(pts, assign)) {
                    v2 += 1;
                }
            }
            self.dfs(depth + 1, used_parts.max(part + 1), v2, assign, best);
        }
    }

    /// First-improvement hill climbing on single-point moves.
    fn climb(&self, assign: &mut [u8], touching: &[Vec<u32>]) -> usize {
        let parts = self.family.parts as u8;
        let mut viol = self.violations(assign);
        loop {
            let mut improved = false;
            for pt in 0..self.family.points {
                let cur = assign[pt];
                let mut best_move: Option<(usize, u8)> = None;
                for cand in 0..parts {
                    if cand == cur {
                        continue;
                    }
                    let mut delta = 0isize;
                    for &mi in &touching[pt] {
                        let pts = &self.members[mi as usize];
                        let was = !self.family.allows(&self.family.pattern_of(pts, assign));
                        assign[pt] = cand;
                        let now = !self.family.allows(&self.family.pattern_of(pts, assign));
                        assign[pt] = cur;
                        delta += now as isize - was as isize;
                    }
                    let new_viol = (viol as isize + delta) as usize;
                    if new_viol < viol && best_move.is_none_or(|(bv, _)| new_viol < bv) {
                        best_move = Some((new_viol, cand));
                    }
                }
                if let Some((nv, cand)) = best_move {
                    assign[pt] = cand;
                    viol = nv;
                    improved = true;
                }
            }
            if !improved {
                return viol;
            }
        }
    }

    fn local_search(&self, opts: PartitionSearchOpts) -> (usize, Vec<u8>) {
        let points = self.family.points;
        let parts = self.family.parts;
        let mut touching: Vec<Vec<u32>> = vec![Vec::new(); points];
        for (i, pts) in self.members.iter().enumerate() {
            for &p in pts {
                touching[p as usize].push(i as u32);
            }
        }
        let mut best = (usize::MAX, vec![0u8; points]);
        for restart in 0..opts.restarts.max(1) {
            let mut rng = rng_from_seed(derive_seed(opts.seed, &[restart as u64]));
            let mut assign: Vec<u8> = (0..points).map(|i| (i % parts) as u8).collect();
            assign.shuffle(&mut rng);
            let viol = self.climb(&mut assign, &touching);
            if viol < best.0 {
                best = (viol, assign);
                if viol == 0 {
                    break;
                }
            }
        }
        best
    }
}

/// Minimum removals from W to make it conform to a partition-defined family.
pub fn partition_distance(
    w: &VertexSubset,
    enc: &Encoding,
    family: &PartiteFamily,
    opts: PartitionSearchOpts,
) -> Result<StabilityDistance> {
    let members = member_points(w, enc)?;
    let problem = PartitionProblem::new(family, members)?;
    let space = (family.parts as u64).checked_pow(
        u32::try_from(family.points)
            .map_err(|_| Error::InvalidParameter("too many points".into()))?,
    );
    let exhaustive = space.is_some_and(|s| s <= opts.exhaustive_limit);
    let (distance, assign) = if exhaustive {
        problem.exhaustive()
    } else {
        problem.local_search(opts)
    };
    Ok(StabilityDistance {
        distance,
        nearest: NearestTarget::Partition(assign),
        exact: exhaustive,
    })
}

/// Distance of W to whichever family kind the encoding targets.
pub fn target_distance(
    w: &VertexSubset,
    enc: &Encoding,
    family: &TargetFamily,
    opts: PartitionSearchOpts,
) -> Result<StabilityDistance> {
    match family {
        TargetFamily::ExplicitSets { sets } => family_distance(w, sets),
        TargetFamily::PartitionDefined { family } => partition_distance(w, enc, family, opts),
    }
}

#[derive(Clone, Copy, Debug)]
pub enum ProbeMode {
    /// All subsets; refused beyond 22 vertices.
    Exhaustive,
    /// Simulated annealing on (induced edges asc, distance desc).
    Anneal { iterations: u64 },
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct StabilityViolator {
    pub subset: VertexSubset,
    pub size: usize,
    pub induced_edges: u64,
    pub distance: usize,
    pub distance_exact: bool,
}

const EXHAUSTIVE_PROBE_CAP: usize = 22;

/// Search for U ⊆ V with |U| ≥ (α−eps)|V|, fewer than eps·|H| induced
/// edges, and distance to the family greater than δ|V|. Returns the
/// strongest such U found (fewest induced edges, then largest distance), or
/// None. A None from the anneal mode is evidence, not proof.
pub fn stability_probe(
    enc: &Encoding,
    family: &TargetFamily,
    alpha: f64,
    eps: f64,
    delta: f64,
    mode: ProbeMode,
    opts: PartitionSearchOpts,
) -> Result<Option<StabilityViolator>> {
    if !(0.0..=1.0).contains(&alpha) || !(eps > 0.0) || delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need alpha in [0,1], eps > 0, delta >= 0; got ({alpha}, {eps}, {delta})"
        )));
    }
    let nv = enc.hypergraph.n_vertices();
    let min_size = ((alpha - eps) * nv as f64).ceil().max(0.0) as usize;
    let edge_cap = eps * enc.hypergraph.edge_count() as f64;
    let dist_floor = delta * nv as f64;

    let qualify = |sub: &VertexSubset| -> Result<Option<StabilityViolator>> {
        let induced = enc.hypergraph.induced_edge_count(sub)?;
        if (induced as f64) >= edge_cap {
            return Ok(None);
        }
        let d = target_distance(sub, enc, family, opts)?;
        if d.distance as f64 > dist_floor {
            Ok(Some(StabilityViolator {
                size: sub.len(),
                induced_edges: induced,
                distance: d.distance,
                distance_exact: d.exact,
                subset: sub.clone(),
            }))
        } else {
            Ok(None)
        }
    };
    let stronger = |a: &StabilityViolator, b: &StabilityViolator| -> bool {
        (a.induced_edges, std::cmp::Reverse(a.distance))
            < (b.induced_edges, std::cmp::Reverse(b.distance))
    };

    match mode {
        ProbeMode::Exhaustive => {
            if nv > EXHAUSTIVE_PROBE_CAP {
                return Err(Error::GuardExceeded(format!(
                    "exhaustive probe over {nv} vertices exceeds the cap of {EXHAUSTIVE_PROBE_CAP}"
                )));
            }
            let mut best: Option<StabilityViolator> = None;
            for mask in 0u32..(1u32 << nv) {
                if (mask.count_ones() as usize) < min_size {
                    continue;
                }
                let sub = VertexSubset::from_members(
                    nv,
                    (0..nv).filter(|&v| mask >> v & 1 == 1),
                )?;
                if let Some(cand) = qualify(&sub)? {
                    if best.as_ref().is_none_or(|b| stronger(&cand, b)) {
                        best = Some(cand);
                    }
                }
            }
            Ok(best)
        }
        ProbeMode::Anneal { iterations } => {
            if iterations == 0 {
                return Err(Error::InvalidParameter("iterations must be >= 1".into()));
            }
            let mut rng = rng_from_seed(derive_seed(opts.seed, &[0x5a]));
            // Start from a random subset of the minimum admissible size.
            let mut pool: Vec<usize> = (0..nv).collect();
            pool.shuffle(&mut rng);
            let start = min_size.max(1).min(nv);
            let mut cur = VertexSubset::from_members(nv, pool[..start].iter().copied())?;
            // Scalar energy with lexicographic weighting: every induced edge
            // outweighs any distance difference.
            let scale = (nv + 1) as f64;
            let energy = |sub: &VertexSubset| -> Result<(f64, u64, usize, bool)> {
                let induced = enc.hypergraph.induced_edge_count(sub)?;
                let d = target_distance(sub, enc, family, opts)?;
                Ok((
                    induced as f64 * scale + (nv - d.distance) as f64,
                    induced,
                    d.distance,
                    d.exact,
                ))
            };
            let (mut cur_e, _, _, _) = energy(&cur)?;
            let mut best: Option<StabilityViolator> = qualify(&cur)?;
            let t0 = scale;
            for it in 0..iterations {
                let frac = it as f64 / iterations as f64;
                let temp = t0 * (1.0 - frac) + 0.01;
                let v = rng.gen_range(0..nv);
                let removing = cur.contains(v);
                if removing && cur.len() <= min_size.max(1) {
                    continue;
                }
                let mut cand = cur.clone();
                if removing {
                    cand.remove(v)?;
                } else {
                    cand.insert(v)?;
                }
                let (cand_e, induced, dist, dist_exact) = energy(&cand)?;
                let accept = cand_e <= cur_e
                    || rng.gen::<f64>() < ((cur_e - cand_e) / temp).exp();
                if accept {
                    cur = cand;
                    cur_e = cand_e;
                    if cur.len() >= min_size && (induced as f64) < edge_cap && dist as f64 > dist_floor
                    {
                        let v = StabilityViolator {
                            size: cur.len(),
                            induced_edges: induced,
                            distance: dist,
                            distance_exact: dist_exact,
                            subset: cur.clone(),
                        };
                        if best.as_ref().is_none_or(|b| stronger(&v, b)) {
                            best = Some(v);
                        }
                    }
                }
            }
            Ok(best)
        }
    }
}
