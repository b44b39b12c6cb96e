//! Dense bit vector over `0..=cap` used as the subset-sum kernel.
//!
//! Every reachable-sum computation in this crate funnels through [`SumSet`]:
//! the exact enumerations, the limit dynamic program and the Monte Carlo
//! estimators all build their sum sets with the same shift-or primitive.

const WORD: usize = 64;

/// Set of achievable sums, stored as a dense bit vector over `0..=cap`.
///
/// Bit 0 is always set: the empty sub-multiset has sum zero. Sums larger
/// than `cap` are silently dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SumSet {
    cap: usize,
    blocks: Vec<u64>,
}

impl SumSet {
    /// The set `{0}` on the domain `0..=cap`.
    pub fn zero(cap: usize) -> Self {
        assert!(cap >= 1, "cap must be positive");
        let mut blocks = vec![0u64; cap / WORD + 1];
        blocks[0] = 1;
        SumSet { cap, blocks }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Reset to `{0}` without reallocating.
    pub fn clear(&mut self) {
        self.blocks.fill(0);
        self.blocks[0] = 1;
    }

    /// Grow the domain to `0..=new_cap`, keeping the current members.
    pub fn grow_cap(&mut self, new_cap: usize) {
        if new_cap > self.cap {
            self.blocks.resize(new_cap / WORD + 1, 0);
            self.cap = new_cap;
        }
    }

    /// Replace the contents with a copy of `other` (same cap required).
    pub fn copy_from(&mut self, other: &SumSet) {
        assert_eq!(self.cap, other.cap, "cap mismatch");
        self.blocks.copy_from_slice(&other.blocks);
    }

    /// Union the set with a copy of itself shifted up by `s`.
    pub fn or_shift(&mut self, s: usize) {
        if s == 0 || s > self.cap {
            return;
        }
        let w = s / WORD;
        let b = s % WORD;
        let len = self.blocks.len();
        // Descending so every source word is read before it is written.
        if b == 0 {
            for i in (w..len).rev() {
                self.blocks[i] |= self.blocks[i - w];
            }
        } else {
            for i in (w..len).rev() {
                let mut v = self.blocks[i - w] << b;
                if i > w {
                    v |= self.blocks[i - w - 1] >> (WORD - b);
                }
                self.blocks[i] |= v;
            }
        }
        self.trim();
    }

    /// Close the set under adding up to `copies` parts of size `part`.
    ///
    /// Multiplicities beyond what can influence bits `<= cap` are capped;
    /// the remaining bounded multiplicity is applied by binary splitting,
    /// so the cost is `O(log copies)` shift-or passes.
    pub fn add_part(&mut self, part: usize, copies: u64) {
        assert!(part >= 1, "parts must be positive");
        if copies == 0 || part > self.cap {
            return;
        }
        let needed = (self.cap / part) as u64 + 1;
        let mut remaining = copies.min(needed);
        let mut chunk: u64 = 1;
        while remaining > 0 {
            let take = chunk.min(remaining);
            let shift = take as usize * part;
            if shift > self.cap {
                break;
            }
            self.or_shift(shift);
            remaining -= take;
            chunk *= 2;
        }
    }

    pub fn contains(&self, s: usize) -> bool {
        s <= self.cap && self.blocks[s / WORD] >> (s % WORD) & 1 == 1
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        false // bit 0 is invariant
    }

    /// Largest member (at least 0).
    pub fn max_element(&self) -> usize {
        for (i, &b) in self.blocks.iter().enumerate().rev() {
            if b != 0 {
                return i * WORD + (WORD - 1 - b.leading_zeros() as usize);
            }
        }
        0
    }

    /// Bitwise superset test; both sets must share a cap.
    pub fn is_superset_of(&self, other: &SumSet) -> bool {
        assert_eq!(self.cap, other.cap, "cap mismatch");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & b == *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.cap).filter(move |&s| self.contains(s))
    }

    /// The low 64 bits as a plain mask (members `0..=min(cap, 63)`).
    pub fn low_mask(&self) -> u64 {
        self.blocks[0]
    }

    fn trim(&mut self) {
        let top_bits = self.cap % WORD + 1;
        if top_bits < WORD {
            let last = self.blocks.len() - 1;
            self.blocks[last] &= (1u64 << top_bits) - 1;
        }
    }
}
