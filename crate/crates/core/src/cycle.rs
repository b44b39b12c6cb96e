//! Cycle-type vectors and their bounded subset-sum sets.

use crate::bitset::SumSet;

/// Multiplicity vector of cycle lengths: `counts()[i]` is the number of
/// cycles of length `i + 1`. The all-zero vector is legal everywhere and
/// denotes "no cycles in the tracked range".
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleType {
    counts: Vec<u64>,
}

impl CycleType {
    pub fn new(counts: Vec<u64>) -> Self {
        CycleType { counts }
    }

    /// All-zero vector covering lengths `1..=max_len`.
    pub fn zeros(max_len: usize) -> Self {
        CycleType {
            counts: vec![0; max_len],
        }
    }

    /// Tally a list of cycle lengths into a multiplicity vector.
    pub fn from_parts(parts: &[u64]) -> Self {
        let max = parts.iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![0u64; max];
        for &p in parts {
            assert!(p >= 1, "cycle lengths must be positive");
            counts[p as usize - 1] += 1;
        }
        CycleType { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Multiplicity of cycles of the given length (1-based).
    pub fn count_of(&self, length: usize) -> u64 {
        assert!(length >= 1);
        self.counts.get(length - 1).copied().unwrap_or(0)
    }

    pub fn set_count(&mut self, length: usize, count: u64) {
        assert!(length >= 1);
        if length > self.counts.len() {
            self.counts.resize(length, 0);
        }
        self.counts[length - 1] = count;
    }

    /// Total weight `sum_i i * c_i`, i.e. the number of points covered.
    pub fn weight(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(idx, &c)| (idx as u64 + 1) * c)
            .sum()
    }

    /// Largest length with a positive count; 1 for the all-zero vector.
    pub fn max_index(&self) -> usize {
        self.counts
            .iter()
            .rposition(|&c| c > 0)
            .map(|idx| idx + 1)
            .unwrap_or(1)
    }

    /// Length of the underlying vector (largest tracked cycle length).
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Coordinate-wise comparison (shorter vectors are padded with zeros).
    pub fn dominates(&self, other: &CycleType) -> bool {
        (1..=other.counts.len().max(self.counts.len()))
            .all(|len| self.count_of(len) >= other.count_of(len))
    }
}

/// All sums `sum_i i * m_i` with `0 <= m_i <= c_i`, truncated at `cap`.
pub fn subset_sums(c: &CycleType, cap: usize) -> SumSet {
    let mut s = SumSet::zero(cap);
    for (idx, &count) in c.counts().iter().enumerate() {
        if count > 0 {
            s.add_part(idx + 1, count);
        }
    }
    s
}

/// Visit every multiplicity vector on lengths `1..=max_len` whose weight is
/// at most `max_weight`, in lexicographic order of the counts.
pub fn for_each_bounded_cycle_type(max_len: usize, max_weight: u64, mut f: impl FnMut(&[u64])) {
    fn rec(len: usize, max_len: usize, left: u64, cur: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        if len > max_len {
            f(cur);
            return;
        }
        let mut c = 0u64;
        loop {
            let w = len as u64 * c;
            if w > left {
                break;
            }
            cur.push(c);
            rec(len + 1, max_len, left - w, cur, f);
            cur.pop();
            c += 1;
        }
    }
    let mut cur = Vec::with_capacity(max_len);
    rec(1, max_len, max_weight, &mut cur, &mut f);
}
