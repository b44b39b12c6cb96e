//! Unordered lists of positive parts (cycle lengths) and the prefix
//! majorant bounding their subset-sum set size.

use num_bigint::BigUint;
use num_traits::One;

use crate::bitset::SumSet;
use crate::error::{Error, Result};

/// Sorted multiset of positive integer parts. May be empty: samplers of
/// small-cycle lengths legitimately return no parts at all.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartList {
    parts: Vec<u64>,
}

impl PartList {
    pub fn new(mut parts: Vec<u64>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::invalid("parts must be positive integers"));
        }
        parts.sort_unstable();
        Ok(PartList { parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn sum(&self) -> u64 {
        self.parts.iter().sum()
    }
}

/// Subset sums of a plain list of parts, each usable at most once,
/// truncated at `cap`.
pub fn subset_sums_of_parts(parts: &[u64], cap: usize) -> SumSet {
    let mut s = SumSet::zero(cap);
    for &p in parts {
        if p as usize <= cap {
            s.or_shift(p as usize);
        }
    }
    s
}

/// Subset sums of a part list truncated at `cap`.
pub fn part_subset_sums(a: &PartList, cap: usize) -> SumSet {
    subset_sums_of_parts(a.parts(), cap)
}

/// Exact size of the subset-sum set (no truncation).
pub fn subset_sum_count(a: &PartList) -> u64 {
    let cap = a.sum().max(1) as usize;
    part_subset_sums(a, cap).len() as u64
}

/// Prefix majorant for the subset-sum set size: the minimum over `j` of
/// `2^(r-j) * (a_1 + ... + a_j + 1)` with the parts sorted increasingly.
/// Always an upper bound for [`subset_sum_count`].
pub fn size_majorant(a: &PartList) -> BigUint {
    let r = a.len();
    let mut best = BigUint::one() << r; // j = 0
    let mut prefix: u64 = 0;
    for (j, &p) in a.parts().iter().enumerate() {
        prefix += p;
        let cand = (BigUint::from(prefix + 1)) << (r - j - 1);
        if cand < best {
            best = cand;
        }
    }
    best
}
