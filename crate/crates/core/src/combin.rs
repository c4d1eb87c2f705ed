//! Small combinatorial utilities: binomial coefficients and the colex
//! indexing of fixed-size subsets used by the copy encodings.

use crate::error::{Error, Result};

/// Binomial coefficient as u64; errors on overflow.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for j in 0..k {
        // acc * (n - j) / (j + 1) is exact at every step because acc already
        // holds C(n, j) and consecutive integers divide the product.
        let num = n - j;
        acc = acc
            .checked_mul(num)
            .ok_or_else(|| Error::GuardExceeded(format!("binomial({n},{k}) overflows u64")))?;
        acc /= j + 1;
    }
    Ok(acc)
}

/// Colex index of a strictly increasing set: sum of C(s[j], j+1).
///
/// Pairs (a, b) with a < b get index a + b(b-1)/2, so pair indices enumerate
/// (0,1), (0,2), (1,2), (0,3), ... in colex order.
pub fn colex_index(set: &[u32]) -> Result<u64> {
    for w in set.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidParameter(format!(
                "colex_index requires a strictly increasing set, got {set:?}"
            )));
        }
    }
    let mut idx = 0u64;
    for (j, &s) in set.iter().enumerate() {
        idx += binomial(s as u64, j as u64 + 1)?;
    }
    Ok(idx)
}

/// Inverse of [`colex_index`]: the `idx`-th `ell`-subset in colex order.
pub fn colex_set(mut idx: u64, ell: usize) -> Result<Vec<u32>> {
    let mut out = vec![0u32; ell];
    for j in (1..=ell).rev() {
        // Largest s with C(s, j) <= idx.
        let mut s = j as u64 - 1;
        let mut c_next = binomial(s + 1, j as u64)?;
        while c_next <= idx {
            s += 1;
            c_next = binomial(s + 1, j as u64)?;
        }
        idx -= binomial(s, j as u64)?;
        out[j - 1] = u32::try_from(s)
            .map_err(|_| Error::GuardExceeded("colex_set element exceeds u32".into()))?;
    }
    Ok(out)
}

/// All `ell`-subsets of `0..n` in colex order.
pub fn all_subsets_colex(n: usize, ell: usize) -> Result<Vec<Vec<u32>>> {
    let total = binomial(n as u64, ell as u64)?;
    let total = usize::try_from(total)
        .map_err(|_| Error::GuardExceeded("subset count exceeds usize".into()))?;
    let mut out = Vec::with_capacity(total);
    if ell == 0 {
        out.push(Vec::new());
        return Ok(out);
    }
    if ell > n {
        return Ok(out);
    }
    let mut cur: Vec<u32> = (0..ell as u32).collect();
    loop {
        out.push(cur.clone());
        // Advance in colex order: bump the lowest position that can grow.
        let mut j = 0;
        loop {
            let cap = if j + 1 < ell { cur[j + 1] } else { n as u32 };
            if cur[j] + 1 < cap {
                cur[j] += 1;
                for (r, slot) in cur.iter_mut().enumerate().take(j) {
                    *slot = r as u32;
                }
                break;
            }
            j += 1;
            if j == ell {
                debug_assert_eq!(out.len(), total);
                return Ok(out);
            }
        }
    }
}
