//! Exact and best-effort solvers for maximum constraint-free subsets.
//!
//! The search is a plain branch-and-bound over vertex states. Constraints
//! (hyperedges, plus degenerate pairs in strict mode) carry included /
//! excluded counters so unit propagation is incremental: a live constraint
//! with one free vertex forces that vertex out, a live constraint with
//! none is a dead branch. The upper bound adds |included| + |remaining|
//! minus a greedy packing of vertex-disjoint live constraints, each of
//! which must lose at least one vertex.

use crate::encode::{BaseDescriptor, Encoding, VertexMeaning};
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::subset::VertexSubset;
use rand::seq::SliceRandom;

/// Node allowance for one branch-and-bound run.
#[derive(Clone, Copy, Debug)]
pub struct SolverBudget {
    pub max_nodes: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget { max_nodes: 2_000_000 }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ExtremalResult {
    pub size: usize,
    pub witness: VertexSubset,
    /// true when the search space was exhausted, false on budget fallback.
    pub exact: bool,
    pub nodes_explored: u64,
    /// Independently recounted on the returned witness; always 0.
    pub edge_violations_remaining: usize,
}

const FREE: u8 = 0;
const INCLUDED: u8 = 1;
const EXCLUDED: u8 = 2;
const OUT_OF_PLAY: u8 = 3;

struct Search {
    constraints: Vec<Vec<u32>>,
    cons_of: Vec<Vec<u32>>,
    state: Vec<u8>,
    inc_count: Vec<u32>,
    exc_count: Vec<u32>,
    included: usize,
    remaining: usize,
    trail: Vec<(u32, u8)>,
    best_size: usize,
    best_members: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
    exhausted: bool,
}

enum Propagation {
    Ok,
    Dead,
}

impl Search {
    fn set_state(&mut self, v: u32, new: u8) {
        debug_assert_eq!(self.state[v as usize], FREE);
        self.state[v as usize] = new;
        self.remaining -= 1;
        if new == INCLUDED {
            self.included += 1;
        }
        for &c in &self.cons_of[v as usize] {
            if new == INCLUDED {
                self.inc_count[c as usize] += 1;
            } else {
                self.exc_count[c as usize] += 1;
            }
        }
        self.trail.push((v, new));
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (v, was) = self.trail.pop().unwrap();
            self.state[v as usize] = FREE;
            self.remaining += 1;
            if was == INCLUDED {
                self.included -= 1;
            }
            for &c in &self.cons_of[v as usize] {
                if was == INCLUDED {
                    self.inc_count[c as usize] -= 1;
                } else {
                    self.exc_count[c as usize] -= 1;
                }
            }
        }
    }

    fn free_in(&self, c: usize) -> usize {
        self.constraints[c].len()
            - self.inc_count[c] as usize
            - self.exc_count[c] as usize
    }

    /// Exclude every lone free vertex of a fully-included-otherwise live
    /// constraint until fixpoint; detect dead branches.
    fn propagate(&mut self) -> Propagation {
        loop {
            let mut changed = false;
            for c in 0..self.constraints.len() {
                if self.exc_count[c] > 0 {
                    continue;
                }
                let free = self.free_in(c);
                if free == 0 {
                    return Propagation::Dead;
                }
                if free == 1 && self.inc_count[c] as usize == self.constraints[c].len() - 1 {
                    let v = *self.constraints[c]
                        .iter()
                        .find(|&&v| self.state[v as usize] == FREE)
                        .expect("free vertex accounted");
                    self.set_state(v, EX_FORCED);
                    changed = true;
                }
            }
            if !changed {
                return Propagation::Ok;
            }
        }
    }

    /// Greedy vertex-disjoint packing of live constraints; each forces one
    /// exclusion, so it lowers the optimistic bound.
    fn packing_bound(&self, marked: &mut [bool]) -> usize {
        for m in marked.iter_mut() {
            *m = false;
        }
        let mut packed = 0;
        'cons: for (c, verts) in self.constraints.iter().enumerate() {
            if self.exc_count[c] > 0 || self.inc_count[c] as usize == verts.len() {
                continue;
            }
            for &v in verts {
                if self.state[v as usize] == FREE && marked[v as usize] {
                    continue 'cons;
                }
            }
            for &v in verts {
                if self.state[v as usize] == FREE {
                    marked[v as usize] = true;
                }
            }
            packed += 1;
        }
        packed
    }

    fn dive(&mut self, marked: &mut [bool]) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.exhausted = true;
            return;
        }
        let mark = self.trail.len();
        if matches!(self.propagate(), Propagation::Dead) {
            self.undo_to(mark);
            return;
        }
        // Pick the live constraint with fewest free vertices.
        let mut pick: Option<(usize, usize)> = None;
        for c in 0..self.constraints.len() {
            if self.exc_count[c] > 0 {
                continue;
            }
            let free = self.free_in(c);
            debug_assert!(free >= 2);
            if pick.is_none_or(|(_, pf)| free < pf) {
                pick = Some((c, free));
                if free == 2 {
                    break;
                }
            }
        }
        let Some((branch_c, _)) = pick else {
            // No live constraints: everything still free joins the solution.
            let size = self.included + self.remaining;
            if size > self.best_size {
                self.best_size = size;
                self.best_members = self
                    .state
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s == INCLUDED || s == FREE)
                    .map(|(v, _)| v)
                    .collect();
            }
            self.undo_to(mark);
            return;
        };
        let bound = self.included + self.remaining - self.packing_bound(marked);
        if bound <= self.best_size {
            self.undo_to(mark);
            return;
        }
        // Branch vertex: a free member of the picked constraint with the
        // most constraints hanging off it.
        let u = *self.constraints[branch_c]
            .iter()
            .filter(|&&v| self.state[v as usize] == FREE)
            .max_by_key(|&&v| self.cons_of[v as usize].len())
            .expect("live constraint has free vertices");
        // Include first: good solutions early tighten the bound sooner.
        let m2 = self.trail.len();
        self.set_state(u, INCLUDED);
        self.dive(marked);
        self.undo_to(m2);
        if self.exhausted {
            self.undo_to(mark);
            return;
        }
        self.set_state(u, EXCLUDED);
        self.dive(marked);
        self.undo_to(mark);
    }
}

/// Forced exclusions share the EXCLUDED undo path.
const EX_FORCED: u8 = EXCLUDED;

fn active_constraints(
    enc: &Encoding,
    available: &VertexSubset,
    strict: bool,
) -> (Vec<Vec<u32>>, Vec<usize>) {
    // Strict singletons knock their vertex out of play outright, and every
    // other constraint through that vertex becomes unviolable with it gone.
    // Filtering against `available` alone would keep such constraints as
    // phantoms that inflate the packing bound, so filter against the
    // reduced availability.
    let mut usable = available.clone();
    let mut forced_out: Vec<usize> = Vec::new();
    if strict {
        for d in &enc.degenerate_constraints {
            if d.len() == 1 && usable.contains(d[0] as usize) {
                forced_out.push(d[0] as usize);
            }
        }
        for &v in &forced_out {
            usable.remove(v).expect("forced-out vertex is in range");
        }
    }
    let mut constraints: Vec<Vec<u32>> = Vec::new();
    for e in enc.hypergraph.edges() {
        if e.iter().all(|&v| usable.contains(v as usize)) {
            constraints.push(e.to_vec());
        }
    }
    if strict {
        for d in &enc.degenerate_constraints {
            if d.len() > 1 && d.iter().all(|&v| usable.contains(v as usize)) {
                constraints.push(d.clone());
            }
        }
    }
    (constraints, forced_out)
}

/// Greedy violation-free subset: sweep vertices by increasing constraint
/// degree, adding whenever no constraint becomes fully included.
fn greedy_incumbent(
    universe: usize,
    available: &[usize],
    constraints: &[Vec<u32>],
    cons_of: &[Vec<u32>],
) -> Vec<usize> {
    let mut order: Vec<usize> = available.to_vec();
    order.sort_by_key(|&v| (cons_of[v].len(), v));
    let mut chosen = vec![false; universe];
    let mut inc = vec![0u32; constraints.len()];
    let mut picked = Vec::new();
    'next: for v in order {
        for &c in &cons_of[v] {
            if inc[c as usize] as usize == constraints[c as usize].len() - 1 {
                continue 'next;
            }
        }
        chosen[v] = true;
        picked.push(v);
        for &c in &cons_of[v] {
            inc[c as usize] += 1;
        }
    }
    picked
}

/// Maximum subset of `available` inducing no constraint, by branch-and-bound
/// seeded with `incumbent` when that is itself violation-free.
pub fn max_free_subset_seeded(
    enc: &Encoding,
    available: &VertexSubset,
    strict: bool,
    budget: SolverBudget,
    incumbent: Option<&VertexSubset>,
) -> Result<ExtremalResult> {
    let universe = enc.hypergraph.n_vertices();
    if available.universe() != universe {
        return Err(Error::UniverseMismatch { left: universe, right: available.universe() });
    }
    let (constraints, forced_out) = active_constraints(enc, available, strict);
    let mut in_play = available.clone();
    for v in forced_out {
        in_play.remove(v)?;
    }
    let play_members = in_play.members();

    let mut cons_of: Vec<Vec<u32>> = vec![Vec::new(); universe];
    for (c, verts) in constraints.iter().enumerate() {
        for &v in verts {
            cons_of[v as usize].push(c as u32);
        }
    }

    let mut best_members = greedy_incumbent(universe, &play_members, &constraints, &cons_of);
    if let Some(seed_set) = incumbent {
        if seed_set.universe() != universe {
            return Err(Error::UniverseMismatch { left: universe, right: seed_set.universe() });
        }
        let trimmed = seed_set.intersection(&in_play)?;
        if trimmed.len() > best_members.len() && violation_count(&constraints, &trimmed) == 0 {
            best_members = trimmed.members();
        }
    }

    let mut state = vec![OUT_OF_PLAY; universe];
    for &v in &play_members {
        state[v] = FREE;
    }
    let mut search = Search {
        inc_count: vec![0; constraints.len()],
        exc_count: vec![0; constraints.len()],
        cons_of,
        state,
        included: 0,
        remaining: play_members.len(),
        trail: Vec::new(),
        best_size: best_members.len(),
        best_members,
        nodes: 0,
        max_nodes: budget.max_nodes,
        exhausted: false,
        constraints,
    };
    let mut marked = vec![false; universe];
    search.dive(&mut marked);

    let witness = VertexSubset::from_members(universe, search.best_members.iter().copied())?;
    // Recount violations from the encoding itself, not the solver's
    // constraint list, so a filtering bug cannot hide one.
    let mut violations = enc.hypergraph.induced_edge_count(&witness)? as usize;
    if strict {
        violations += enc
            .degenerate_constraints
            .iter()
            .filter(|d| d.iter().all(|&v| witness.contains(v as usize)))
            .count();
    }
    Ok(ExtremalResult {
        size: witness.len(),
        witness,
        exact: !search.exhausted,
        nodes_explored: search.nodes,
        edge_violations_remaining: violations,
    })
}

pub fn max_free_subset(
    enc: &Encoding,
    available: &VertexSubset,
    strict: bool,
    budget: SolverBudget,
) -> Result<ExtremalResult> {
    max_free_subset_seeded(enc, available, strict, budget, None)
}

fn violation_count(constraints: &[Vec<u32>], set: &VertexSubset) -> usize {
    constraints
        .iter()
        .filter(|c| c.iter().all(|&v| set.contains(v as usize)))
        .count()
}

/// A sampled extremal trial: the V_p draw plus what the solver made of it.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TrialOutcome {
    pub sampled_size: usize,
    pub extremal_size: usize,
    pub exact: bool,
    pub nodes_explored: u64,
    /// extremal_size / sampled_size, 0 when nothing was sampled.
    pub ratio: f64,
    pub sampled: VertexSubset,
    pub witness: VertexSubset,
}

/// Draw V_p and solve for its largest violation-free subset. The solver is
/// seeded with the better of a greedy sweep and (for copy encodings) the
/// best of a few hill-climbed crossing-edge subsets.
pub fn sample_and_solve(
    enc: &Encoding,
    p: f64,
    seed: u64,
    strict: bool,
    budget: SolverBudget,
) -> Result<TrialOutcome> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p={p} outside [0,1]")));
    }
    let universe = enc.hypergraph.n_vertices();
    let mut rng = rng_from_seed(derive_seed(seed, &[0]));
    let sampled = VertexSubset::sample_bernoulli(universe, p, &mut rng)?;
    let incumbent = partition_incumbent(enc, &sampled, derive_seed(seed, &[1]))?;
    let result = max_free_subset_seeded(enc, &sampled, strict, budget, incumbent.as_ref())?;
    let ratio = if sampled.is_empty() {
        0.0
    } else {
        result.size as f64 / sampled.len() as f64
    };
    Ok(TrialOutcome {
        sampled_size: sampled.len(),
        extremal_size: result.size,
        exact: result.exact,
        nodes_explored: result.nodes_explored,
        ratio,
        sampled,
        witness: result.witness,
    })
}

/// For copy encodings whose pattern needs χ colors, edges crossing parts of
/// a (χ−1)-partition of the base points can never complete a copy. Hill
/// climbing on point moves maximizes the crossing count within `available`.
fn partition_incumbent(
    enc: &Encoding,
    available: &VertexSubset,
    seed: u64,
) -> Result<Option<VertexSubset>> {
    let BaseDescriptor::GraphCopies { pattern, n, .. } = &enc.base else {
        return Ok(None);
    };
    let chi = crate::density::chromatic_number(pattern)? as usize;
    if chi < 3 {
        return Ok(None);
    }
    let parts = chi - 1;
    let points = *n;
    // Endpoints of each available encoding vertex (a K_n edge).
    let mut endpoints: Vec<(u32, u32)> = Vec::new();
    let mut ids: Vec<usize> = Vec::new();
    for v in available.members() {
        if let VertexMeaning::BaseSet { points: pts } = &enc.vertex_meaning[v] {
            if pts.len() == 2 {
                endpoints.push((pts[0], pts[1]));
                ids.push(v);
            }
        }
    }
    if ids.is_empty() {
        return Ok(None);
    }
    let mut touching: Vec<Vec<u32>> = vec![Vec::new(); points];
    for (i, &(a, b)) in endpoints.iter().enumerate() {
        touching[a as usize].push(i as u32);
        touching[b as usize].push(i as u32);
    }
    let mut best_cross = 0usize;
    let mut best_assign: Option<Vec<u8>> = None;
    for restart in 0..4u64 {
        let mut rng = rng_from_seed(derive_seed(seed, &[restart]));
        let mut assign: Vec<u8> = (0..points).map(|i| (i % parts) as u8).collect();
        assign.shuffle(&mut rng);
        let crossing = |assign: &[u8], i: usize| {
            let (a, b) = endpoints[i];
            assign[a as usize] != assign[b as usize]
        };
        let mut cross = (0..endpoints.len()).filter(|&i| crossing(&assign, i)).count();
        loop {
            let mut improved = false;
            for pt in 0..points {
                let cur = assign[pt];
                let mut local_best = (0isize, cur);
                for cand in 0..parts as u8 {
                    if cand == cur {
                        continue;
                    }
                    let mut delta = 0isize;
                    for &ei in &touching[pt] {
                        let (a, b) = endpoints[ei as usize];
                        let other = if a as usize == pt { b } else { a };
                        let was = cur != assign[other as usize];
                        let now = cand != assign[other as usize];
                        delta += now as isize - was as isize;
                    }
                    if delta > local_best.0 {
                        local_best = (delta, cand);
                    }
                }
                if local_best.0 > 0 {
                    assign[pt] = local_best.1;
                    cross = (cross as isize + local_best.0) as usize;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        if cross > best_cross {
            best_cross = cross;
            best_assign = Some(assign);
        }
    }
    let Some(assign) = best_assign else { return Ok(None) };
    let members = ids.iter().zip(&endpoints).filter_map(|(&v, &(a, b))| {
        (assign[a as usize] != assign[b as usize]).then_some(v)
    });
    Ok(Some(VertexSubset::from_members(available.universe(), members)?))
}

/// Ordered Schur-triple count within A: #{(x,y) ∈ A²: x+y ∈ A}. Degenerate
/// triples (x = y, or z coinciding with a summand) count.
pub fn schur_count(enc: &Encoding, a: &VertexSubset) -> Result<u64> {
    let BaseDescriptor::Schur { group } = &enc.base else {
        return Err(Error::Unsupported(format!(
            "schur_count needs a Schur encoding, got {}",
            enc.label
        )));
    };
    let order = group.order() as usize;
    if a.universe() != order {
        return Err(Error::UniverseMismatch { left: order, right: a.universe() });
    }
    let members = a.members();
    let mut count = 0u64;
    for &x in &members {
        for &y in &members {
            let z = group.add(x as u64, y as u64);
            if a.contains(z as usize) {
                count += 1;
            }
        }
    }
    Ok(count)
}
