//! Finite abelian groups as direct products of cyclic groups, the Schur
//! encoding, and exact maximum sum-free enumeration at small orders.

use std::collections::BTreeSet;

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

use crate::encode::{BaseDescriptor, Encoding, VertexMeaning};
use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;
use crate::subset::VertexSubset;

/// Direct product of cyclic groups; element ids are mixed-radix encodings of
/// the coordinate vectors (first factor is the least significant digit), so
/// id 0 is always the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    cyclic_orders: Vec<u64>,
}

/// Default cap on exact maximum sum-free enumeration.
pub const DEFAULT_MAX_SUMFREE_ORDER: u64 = 30;

impl GroupSpec {
    pub fn new(cyclic_orders: Vec<u64>) -> Result<Self> {
        if cyclic_orders.is_empty() {
            return Err(Error::InvalidParameter("group needs at least one cyclic factor".into()));
        }
        let mut order: u64 = 1;
        for &o in &cyclic_orders {
            if o < 2 {
                return Err(Error::InvalidParameter(format!("cyclic order {o} must be >= 2")));
            }
            order = order
                .checked_mul(o)
                .ok_or_else(|| Error::GuardExceeded("group order overflows u64".into()))?;
        }
        Ok(GroupSpec { cyclic_orders })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn cyclic_orders(&self) -> &[u64] {
        &self.cyclic_orders
    }

    pub fn order(&self) -> u64 {
        self.cyclic_orders.iter().product()
    }

    pub fn coords(&self, id: u64) -> Vec<u64> {
        let mut rest = id;
        self.cyclic_orders
            .iter()
            .map(|&o| {
                let c = rest % o;
                rest /= o;
                c
            })
            .collect()
    }

    pub fn id_of(&self, coords: &[u64]) -> Result<u64> {
        if coords.len() != self.cyclic_orders.len() {
            return Err(Error::InvalidParameter(format!(
                "coordinate vector {coords:?} has wrong length for {} factors",
                self.cyclic_orders.len()
            )));
        }
        let mut id = 0u64;
        for (&c, &o) in coords.iter().zip(&self.cyclic_orders).rev() {
            if c >= o {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {c} out of range for cyclic order {o}"
                )));
            }
            id = id * o + c;
        }
        Ok(id)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (mut a, mut b) = (a, b);
        let mut id = 0u64;
        let mut stride = 1u64;
        for &o in &self.cyclic_orders {
            let c = (a % o + b % o) % o;
            id += c * stride;
            stride *= o;
            a /= o;
            b /= o;
        }
        id
    }

    pub fn neg(&self, a: u64) -> u64 {
        let mut a = a;
        let mut id = 0u64;
        let mut stride = 1u64;
        for &o in &self.cyclic_orders {
            let c = (o - a % o) % o;
            id += c * stride;
            stride *= o;
            a /= o;
        }
        id
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.cyclic_orders.iter().map(|o| format!("z{o}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Smallest prime q ≡ 2 (mod 3) dividing the group order, if any.
pub fn group_type_i(group: &GroupSpec) -> Option<u64> {
    let mut n = group.order();
    let mut best: Option<u64> = None;
    let mut consider = |p: u64| {
        if p % 3 == 2 && best.is_none_or(|b| p < b) {
            best = Some(p);
        }
    };
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            consider(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        consider(n);
    }
    best
}

/// Maximum sum-free density 1/3 + 1/(3q) for a type I(q) group, exactly.
pub fn mu_max_sumfree_density(group: &GroupSpec) -> Result<BigRational> {
    let q = group_type_i(group).ok_or_else(|| {
        Error::Unsupported(format!(
            "group {group} is not type I; its maximum sum-free density has no closed form here"
        ))
    })?;
    Ok(BigRational::new(BigInt::from(q + 1), BigInt::from(3u64 * q)))
}

/// The Schur encoding: k=3 hypergraph on the group elements whose edges are
/// all 3-element sets {x,y,z} with x+y=z; the collapsed solutions (x+x=z
/// pairs, and the singleton {0} from 0+0=0) go into degenerate_constraints.
pub fn encode_schur(group: &GroupSpec) -> Result<Encoding> {
    let n64 = group.order();
    let n = usize::try_from(n64)
        .map_err(|_| Error::GuardExceeded(format!("group order {n64} too large")))?;
    let mut triples: BTreeSet<[u32; 3]> = BTreeSet::new();
    for x in 0..n64 {
        for y in (x + 1)..n64 {
            let z = group.add(x, y);
            if z != x && z != y {
                let mut t = [x as u32, y as u32, z as u32];
                t.sort_unstable();
                triples.insert(t);
            }
        }
    }
    let edges: Vec<Vec<u32>> = triples.into_iter().map(|t| t.to_vec()).collect();
    let hypergraph = UniformHypergraph::new(3, n, edges)?;

    let mut degenerate: BTreeSet<Vec<u32>> = BTreeSet::new();
    for x in 0..n64 {
        let z = group.add(x, x);
        if z == x {
            degenerate.insert(vec![x as u32]);
        } else {
            let mut pair = vec![x as u32, z as u32];
            pair.sort_unstable();
            degenerate.insert(pair);
        }
    }
    let vertex_meaning =
        (0..n64).map(|id| VertexMeaning::GroupElement { coords: group.coords(id) }).collect();
    Ok(Encoding {
        label: format!("schur-{group}"),
        hypergraph,
        base: BaseDescriptor::Schur { group: group.clone() },
        degenerate_constraints: degenerate.into_iter().collect(),
        vertex_meaning,
    })
}

/// Is `set` sum-free in the strict sense: no (x,y,z) ∈ set³ with x+y=z,
/// including x=y and other collapses.
pub fn is_strict_sumfree(group: &GroupSpec, set: &VertexSubset) -> Result<bool> {
    if set.universe() as u64 != group.order() {
        return Err(Error::UniverseMismatch {
            left: set.universe(),
            right: group.order() as usize,
        });
    }
    let members: Vec<u64> = set.iter().map(|v| v as u64).collect();
    for &x in &members {
        for &y in &members {
            if set.contains(group.add(x, y) as usize) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All maximum-size strict sum-free subsets, by exact branch-and-prune
/// search over element inclusion. Guarded: refuses orders above
/// `max_order` (callers pass [`DEFAULT_MAX_SUMFREE_ORDER`] unless they have
/// accepted the cost).
pub fn max_sumfree_sets(group: &GroupSpec, max_order: u64) -> Result<Vec<VertexSubset>> {
    let n64 = group.order();
    if n64 > max_order {
        return Err(Error::GuardExceeded(format!(
            "exact sum-free enumeration is limited to order {max_order}, group has {n64}"
        )));
    }
    let n = n64 as usize;
    let add: Vec<Vec<u32>> =
        (0..n64).map(|a| (0..n64).map(|b| group.add(a, b) as u32).collect()).collect();
    let sub: Vec<Vec<u32>> =
        (0..n64).map(|a| (0..n64).map(|b| group.sub(a, b) as u32).collect()).collect();

    // Element 0 never participates (0+0=0), so branch over 1..n.
    struct Search<'a> {
        n: usize,
        add: &'a [Vec<u32>],
        sub: &'a [Vec<u32>],
        cur: Vec<u32>,
        in_cur: Vec<bool>,
        best: usize,
        found: Vec<Vec<u32>>,
    }
    impl Search<'_> {
        fn compatible(&self, e: u32) -> bool {
            let eu = e as usize;
            // e + e must stay outside cur ∪ {e}.
            let ee = self.add[eu][eu];
            if ee == e || self.in_cur[ee as usize] {
                return false;
            }
            for &a in &self.cur {
                let au = a as usize;
                // a + e and e + a coincide (abelian); must avoid cur ∪ {e}.
                let s = self.add[au][eu];
                if s == e || self.in_cur[s as usize] {
                    return false;
                }
                // Existing pair sums must not produce e: a + b = e for b ∈ cur ∪ {e}
                // means b = e - a.
                let b = self.sub[eu][au];
                if b == e || self.in_cur[b as usize] {
                    return false;
                }
            }
            true
        }

        fn run(&mut self, next: usize) {
            if next == self.n {
                if self.cur.len() > self.best {
                    self.best = self.cur.len();
                    self.found.clear();
                }
                if self.cur.len() == self.best {
                    self.found.push(self.cur.clone());
                }
                return;
            }
            // Prune only when strictly unable to reach the incumbent;
            // ties must still be visited to collect every maximum set.
            if self.cur.len() + (self.n - next) < self.best {
                return;
            }
            if self.compatible(next as u32) {
                self.cur.push(next as u32);
                self.in_cur[next] = true;
                self.run(next + 1);
                self.in_cur[next] = false;
                self.cur.pop();
            }
            self.run(next + 1);
        }
    }

    let mut search = Search {
        n,
        add: &add,
        sub: &sub,
        cur: Vec::new(),
        in_cur: vec![false; n],
        best: 0,
        found: Vec::new(),
    };
    search.run(1);

    let mut sets = Vec::with_capacity(search.found.len());
    for members in search.found {
        let s = VertexSubset::from_members(n, members.iter().map(|&v| v as usize))?;
        debug_assert!(is_strict_sumfree(group, &s)?);
        sets.push(s);
    }
    // Branching order already yields lexicographic member order; keep it.
    Ok(sets)
}
