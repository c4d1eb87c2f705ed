//! Vertex subsets over a fixed universe, stored as packed 64-bit blocks.

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A subset of `{0, .., universe-1}`.
///
/// Invariant: bits at positions >= universe are always zero, so equality and
/// popcounts can work blockwise without masking.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSubset {
    universe: usize,
    blocks: Vec<u64>,
}

fn block_count(universe: usize) -> usize {
    universe.div_ceil(64)
}

impl VertexSubset {
    pub fn empty(universe: usize) -> Self {
        VertexSubset { universe, blocks: vec![0; block_count(universe)] }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = VertexSubset { universe, blocks: vec![!0u64; block_count(universe)] };
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let rem = self.universe % 64;
        if rem != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(universe: usize, members: I) -> Result<Self> {
        let mut s = Self::empty(universe);
        for v in members {
            s.insert(v)?;
        }
        Ok(s)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && (self.blocks[v / 64] >> (v % 64)) & 1 == 1
    }

    pub fn insert(&mut self, v: usize) -> Result<()> {
        if v >= self.universe {
            return Err(Error::VertexOutOfRange { vertex: v, universe: self.universe });
        }
        self.blocks[v / 64] |= 1u64 << (v % 64);
        Ok(())
    }

    pub fn remove(&mut self, v: usize) -> Result<()> {
        if v >= self.universe {
            return Err(Error::VertexOutOfRange { vertex: v, universe: self.universe });
        }
        self.blocks[v / 64] &= !(1u64 << (v % 64));
        Ok(())
    }

    /// Iterate members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &b)| {
            let mut bits = b;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(bi * 64 + t)
                }
            })
        })
    }

    pub fn members(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn check_same_universe(&self, other: &Self) -> Result<()> {
        if self.universe != other.universe {
            return Err(Error::UniverseMismatch { left: self.universe, right: other.universe });
        }
        Ok(())
    }

    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        self.check_same_universe(other)?;
        Ok(self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same_universe(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a | b).collect();
        Ok(VertexSubset { universe: self.universe, blocks })
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_same_universe(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a & b).collect();
        Ok(VertexSubset { universe: self.universe, blocks })
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_same_universe(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a & !b).collect();
        Ok(VertexSubset { universe: self.universe, blocks })
    }

    /// |self \ other| without allocating.
    pub fn difference_len(&self, other: &Self) -> Result<usize> {
        self.check_same_universe(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum())
    }

    pub fn intersection_len(&self, other: &Self) -> Result<usize> {
        self.check_same_universe(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    pub fn complement(&self) -> Self {
        let mut s = VertexSubset {
            universe: self.universe,
            blocks: self.blocks.iter().map(|b| !b).collect(),
        };
        s.mask_tail();
        s
    }

    /// Keep each element of `0..universe` independently with probability `p`,
    /// consuming one f64 draw per element in increasing element order. The
    /// fixed order is part of the reproducibility contract.
    pub fn sample_bernoulli<R: Rng>(universe: usize, p: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0,1]")));
        }
        let mut s = Self::empty(universe);
        for v in 0..universe {
            if rng.gen::<f64>() < p {
                s.blocks[v / 64] |= 1u64 << (v % 64);
            }
        }
        Ok(s)
    }

    /// Run-length encoding: alternating run lengths over `0..universe`,
    /// starting with a run of absent elements (possibly length 0). The sum of
    /// runs always equals the universe size.
    pub fn to_rle(&self) -> Vec<u32> {
        let mut runs = Vec::new();
        let mut current = false; // first run counts absent elements
        let mut len: u32 = 0;
        for v in 0..self.universe {
            let bit = self.contains(v);
            if bit == current {
                len += 1;
            } else {
                runs.push(len);
                current = bit;
                len = 1;
            }
        }
        runs.push(len);
        runs
    }

    pub fn from_rle(universe: usize, runs: &[u32]) -> Result<Self> {
        let total: u64 = runs.iter().map(|&r| r as u64).sum();
        if total != universe as u64 {
            return Err(Error::Parse(format!(
                "run lengths sum to {total}, expected universe size {universe}"
            )));
        }
        let mut s = Self::empty(universe);
        let mut pos = 0usize;
        for (i, &r) in runs.iter().enumerate() {
            if i % 2 == 1 {
                for v in pos..pos + r as usize {
                    s.blocks[v / 64] |= 1u64 << (v % 64);
                }
            }
            pos += r as usize;
        }
        Ok(s)
    }
}

impl std::fmt::Debug for VertexSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VertexSubset(|U|={}, {:?})", self.universe, self.members())
    }
}

#[derive(Serialize, Deserialize)]
struct SubsetRepr {
    universe: usize,
    members: Vec<usize>,
}

impl Serialize for VertexSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SubsetRepr { universe: self.universe, members: self.members() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VertexSubset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SubsetRepr::deserialize(deserializer)?;
        VertexSubset::from_members(repr.universe, repr.members).map_err(D::Error::custom)
    }
}
