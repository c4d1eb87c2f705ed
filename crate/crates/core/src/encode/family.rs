//! Target families: the reference structures extremal witnesses are
//! compared against (partition-defined families of "good" configurations,
//! or explicit lists of optimal sets).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::density::chromatic_number;
use crate::encode::group::{max_sumfree_sets, DEFAULT_MAX_SUMFREE_ORDER};
use crate::encode::{BaseDescriptor, Encoding};
use crate::error::{Error, Result};
use crate::subset::VertexSubset;

/// A family defined by partitions of the base point set into `parts`
/// classes: a member set (an ℓ-subset of the points) conforms when the
/// multiset of per-part counts it meets is allowed.
///
/// Patterns are canonicalized as positive counts sorted descending, summing
/// to `set_size`, with at most `parts` entries — e.g. for 3-sets in 2 parts
/// the possible patterns are [3] and [2,1].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartiteFamily {
    pub points: usize,
    pub parts: usize,
    pub set_size: usize,
    pub allowed_patterns: BTreeSet<Vec<u8>>,
}

impl PartiteFamily {
    pub fn new<I>(points: usize, parts: usize, set_size: usize, allowed: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u8>>,
    {
        if parts < 2 {
            return Err(Error::InvalidParameter(format!("parts {parts} must be >= 2")));
        }
        if set_size == 0 {
            return Err(Error::InvalidParameter("set_size must be positive".into()));
        }
        let mut canon = BTreeSet::new();
        for mut pat in allowed {
            pat.retain(|&c| c != 0);
            pat.sort_unstable_by(|a, b| b.cmp(a));
            let sum: u64 = pat.iter().map(|&c| c as u64).sum();
            if sum != set_size as u64 {
                return Err(Error::InvalidParameter(format!(
                    "pattern {pat:?} sums to {sum}, expected {set_size}"
                )));
            }
            if pat.len() > parts {
                return Err(Error::InvalidParameter(format!(
                    "pattern {pat:?} uses more than {parts} parts"
                )));
            }
            canon.insert(pat);
        }
        if canon.is_empty() {
            return Err(Error::InvalidParameter("allowed pattern set must be nonempty".into()));
        }
        Ok(PartiteFamily { points, parts, set_size, allowed_patterns: canon })
    }

    /// Graph case: an edge is good iff its endpoints land in different parts.
    pub fn graph(points: usize, parts: usize) -> Result<Self> {
        Self::new(points, parts, 2, vec![vec![1, 1]])
    }

    /// Transversal case: one point in each of `set_size` distinct parts.
    pub fn transversal(points: usize, parts: usize, set_size: usize) -> Result<Self> {
        if parts < set_size {
            return Err(Error::InvalidParameter(format!(
                "transversal pattern needs parts >= set_size, got {parts} < {set_size}"
            )));
        }
        Self::new(points, parts, set_size, vec![vec![1; set_size]])
    }

    /// 4-sets meeting both of two parts twice.
    pub fn doubled_pairs(points: usize) -> Result<Self> {
        Self::new(points, 2, 4, vec![vec![2, 2]])
    }

    /// 3-sets not inside one of two parts (every pattern except [3]).
    pub fn split_triples(points: usize) -> Result<Self> {
        Self::new(points, 2, 3, vec![vec![2, 1]])
    }

    /// Canonical count pattern of a member under a point→part assignment.
    pub fn pattern_of(&self, member_points: &[u32], assignment: &[u8]) -> Vec<u8> {
        let mut counts = vec![0u8; self.parts];
        for &p in member_points {
            counts[assignment[p as usize] as usize] += 1;
        }
        counts.retain(|&c| c != 0);
        counts.sort_unstable_by(|a, b| b.cmp(a));
        counts
    }

    pub fn allows(&self, pattern: &[u8]) -> bool {
        self.allowed_patterns.contains(pattern)
    }
}

/// The target family a witness is measured against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetFamily {
    ExplicitSets { sets: Vec<VertexSubset> },
    PartitionDefined { family: PartiteFamily },
}

/// Build a partition-defined family after validating the patterns.
pub fn target_family_partite<I>(
    points: usize,
    parts: usize,
    set_size: usize,
    allowed: I,
) -> Result<TargetFamily>
where
    I: IntoIterator<Item = Vec<u8>>,
{
    Ok(TargetFamily::PartitionDefined {
        family: PartiteFamily::new(points, parts, set_size, allowed)?,
    })
}

/// All maximum strict sum-free sets as an explicit family.
pub fn target_family_sumfree_max(
    group: &crate::encode::GroupSpec,
    max_order: u64,
) -> Result<TargetFamily> {
    Ok(TargetFamily::ExplicitSets { sets: max_sumfree_sets(group, max_order)? })
}

/// The family an encoding is naturally measured against, when one exists:
/// complete multipartite structures for copy encodings (chromatic number
/// minus one parts for graphs, the documented partitions for the named
/// 3-uniform/4-uniform patterns), maximum sum-free sets for Schur encodings
/// at enumerable order. None when no canonical family applies.
pub fn default_target_family(enc: &Encoding) -> Result<Option<TargetFamily>> {
    match &enc.base {
        BaseDescriptor::GraphCopies { pattern, n, .. } => {
            let chi = chromatic_number(pattern)?;
            if chi < 3 {
                return Ok(None);
            }
            Ok(Some(TargetFamily::PartitionDefined {
                family: PartiteFamily::graph(*n, chi as usize - 1)?,
            }))
        }
        BaseDescriptor::HypergraphCopies { pattern_label, n, .. } => {
            let family = match pattern_label.as_str() {
                "book-3-2" => Some(PartiteFamily::transversal(*n, 3, 3)?),
                "book-4-3" => Some(PartiteFamily::doubled_pairs(*n)?),
                "fano" => Some(PartiteFamily::split_triples(*n)?),
                _ => None,
            };
            Ok(family.map(|family| TargetFamily::PartitionDefined { family }))
        }
        BaseDescriptor::Schur { group } => {
            if group.order() > DEFAULT_MAX_SUMFREE_ORDER {
                return Ok(None);
            }
            Ok(Some(target_family_sumfree_max(group, DEFAULT_MAX_SUMFREE_ORDER)?))
        }
        BaseDescriptor::Aps { .. } => Ok(None),
    }
}
