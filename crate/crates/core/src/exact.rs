//! Exact finite-n computations in arbitrary-precision rational arithmetic:
//! disjoint-cycle choice counts, permutations without short cycles, and the
//! probability that a uniform random permutation fixes a set of a given size.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cycle::{for_each_bounded_cycle_type, CycleType};
use crate::error::{Error, Result};
use crate::report::Report;

/// Exact probability as a reduced fraction.
pub type ExactProb = BigRational;

/// Largest `n` accepted by [`brute_force_probability`] (factorial blowup).
pub const BRUTE_FORCE_MAX_N: u64 = 9;

/// Documented feasibility envelope for exact evaluation; front ends should
/// refuse larger `n` and defer to the Monte Carlo estimators.
pub const EXACT_MAX_N: u64 = 60;

/// Shared caches for the exact computations: factorials and the
/// no-short-cycle counts. Confine one engine to one thread; independent
/// engines are cheap.
pub struct ExactEngine {
    factorials: Vec<BigInt>,
    no_short: HashMap<(u64, u64), BigInt>,
}

impl Default for ExactEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactEngine {
    pub fn new() -> Self {
        ExactEngine {
            factorials: vec![BigInt::one()],
            no_short: HashMap::new(),
        }
    }

    pub fn factorial(&mut self, n: u64) -> BigInt {
        let n = n as usize;
        while self.factorials.len() <= n {
            let i = self.factorials.len();
            let next = &self.factorials[i - 1] * BigInt::from(i);
            self.factorials.push(next);
        }
        self.factorials[n].clone()
    }

    /// `n! / (n-t)!`
    fn falling_factorial(&mut self, n: u64, t: u64) -> BigInt {
        debug_assert!(t <= n);
        self.factorial(n) / self.factorial(n - t)
    }

    /// Number of ways to choose disjoint cycles in S_n realizing the given
    /// multiplicities: `n!/(n-t)! * prod_j 1/(c_j! j^c_j)`, an exact integer.
    pub fn cauchy_count(&mut self, c: &CycleType, n: u64) -> Result<BigInt> {
        let t = c.weight();
        if t > n {
            return Err(Error::WeightExceedsN { t, n });
        }
        let mut denom = BigInt::one();
        for (idx, &count) in c.counts().iter().enumerate() {
            if count > 0 {
                let j = BigInt::from(idx + 1);
                denom *= self.factorial(count) * j.pow(count as u32);
            }
        }
        let num = self.falling_factorial(n, t);
        let (q, r) = num.div_rem(&denom);
        assert!(r.is_zero(), "cycle choice count must be an integer");
        Ok(q)
    }

    /// Number of permutations of `n` points with no cycle of length `< m`.
    ///
    /// Computed by the exact recurrence
    /// `n*c(n,m) = n! + sum_{m<=j<=n-m} n!/(n-j)! * c(n-j,m)`,
    /// with `c(0,m) = 1` and `c(n,m) = (n-1)!` for `n/2 < m <= n`.
    pub fn no_short_cycle_count(&mut self, n: u64, m: u64) -> BigInt {
        assert!(m >= 1, "m must be positive");
        if n == 0 {
            return BigInt::one();
        }
        if m > n {
            // Every nonempty permutation has a cycle of length <= n < m.
            return BigInt::zero();
        }
        if 2 * m > n {
            // Only the n-cycles survive.
            return self.factorial(n - 1);
        }
        if let Some(v) = self.no_short.get(&(n, m)) {
            return v.clone();
        }
        let mut acc = self.factorial(n);
        for j in m..=(n - m) {
            acc += self.falling_factorial(n, j) * self.no_short_cycle_count(n - j, m);
        }
        let (q, r) = acc.div_rem(&BigInt::from(n));
        assert!(r.is_zero(), "recurrence must divide exactly");
        self.no_short.insert((n, m), q.clone());
        q
    }

    /// Probability that a uniform random permutation of `n` points fixes
    /// some set of size `k`, as an exact reduced fraction.
    ///
    /// Sums over multiplicity vectors on lengths `1..=k` whose reachable
    /// sums contain `k`, weighting each by the probability that the
    /// remaining points carry no cycle of length `<= k`. The enumeration is
    /// depth-first over lengths with the running (weight, reachable-sums)
    /// pair memoized per length.
    pub fn fixed_set_probability(&mut self, n: u64, k: u64) -> Result<ExactProb> {
        if k < 1 || 2 * k > n {
            return Err(Error::KOutOfRange { n, k });
        }
        if k > 62 {
            // The reachable-sum mask must fit one machine word.
            return Err(Error::ExactEnvelope { n, max: 2 * 62 });
        }
        let mut memo = HashMap::new();
        Ok(self.fixed_set_suffix(1, 0, 1, n, k, &mut memo))
    }

    fn fixed_set_suffix(
        &mut self,
        len: u64,
        t: u64,
        mask: u64,
        n: u64,
        k: u64,
        memo: &mut HashMap<(u64, u64, u64), BigRational>,
    ) -> BigRational {
        if len > k {
            if mask >> k & 1 == 0 {
                return BigRational::zero();
            }
            let m = n - t;
            let count = self.no_short_cycle_count(m, k + 1);
            return BigRational::new(count, self.factorial(m));
        }
        if let Some(v) = memo.get(&(len, t, mask)) {
            return v.clone();
        }
        let full = (1u64 << (k + 1)) - 1;
        let mut acc = BigRational::zero();
        let mut weight = BigRational::one(); // 1/(c! * len^c)
        let mut m = mask;
        let mut c = 0u64;
        loop {
            let t2 = t + len * c;
            if t2 > n {
                break;
            }
            acc += &weight * self.fixed_set_suffix(len + 1, t2, m, n, k, memo);
            c += 1;
            weight /= BigRational::from_integer(BigInt::from(c * len));
            m |= (m << len) & full;
        }
        memo.insert((len, t, mask), acc.clone());
        acc
    }

    /// Lemma-style sandwich on the no-short-cycle probability:
    /// `1/(2m) <= c(n,m)/n! <= 1/m` for all `1 <= m <= n <= n_max`, with
    /// equality `1/n` whenever `n/2 < m <= n`. Exact integer comparisons.
    pub fn verify_short_cycle_bounds(&mut self, n_max: u64) -> Report {
        let mut report = Report::default();
        for n in 1..=n_max {
            let nf = self.factorial(n);
            for m in 1..=n {
                let c = self.no_short_cycle_count(n, m);
                let lower_ok = BigInt::from(2 * m) * &c >= nf;
                let upper_ok = BigInt::from(m) * &c <= nf;
                let mut pass = lower_ok && upper_ok;
                let mut detail = format!("1/{} <= {}/{}! <= 1/{}", 2 * m, c, n, m);
                if 2 * m > n {
                    let eq = BigInt::from(n) * &c == nf;
                    pass &= eq;
                    detail.push_str(if eq {
                        "; equals 1/n"
                    } else {
                        "; equality 1/n FAILED"
                    });
                }
                report.check(format!("no-short-cycle bounds n={n} m={m}"), pass, detail);
            }
        }
        report
    }

    /// Two-sided bounds on the probability of observing exact small-cycle
    /// multiplicities: for every vector `c` on lengths `1..=m` with weight
    /// `<= n-m-1`,
    /// `1/((2m+2) D) <= P(counts = c) <= 1/((m+1) D)` with
    /// `D = prod c_i! i^c_i`. Exact rational comparisons.
    pub fn verify_cycle_count_bounds(&mut self, n: u64, m: u64) -> Result<Report> {
        if m < 1 || m >= n || n > 12 {
            return Err(Error::invalid(format!(
                "requires 1 <= m < n <= 12, got n={n} m={m}"
            )));
        }
        let mut report = Report::default();
        let nf = self.factorial(n);
        let budget = n - m - 1;
        let mut vectors = Vec::new();
        for_each_bounded_cycle_type(m as usize, budget, |c| vectors.push(c.to_vec()));
        for counts in vectors {
            let c = CycleType::new(counts.clone());
            let t = c.weight();
            let mut d = BigInt::one();
            for (idx, &count) in c.counts().iter().enumerate() {
                if count > 0 {
                    d *= self.factorial(count) * BigInt::from(idx + 1).pow(count as u32);
                }
            }
            let ways = self.cauchy_count(&c, n)?;
            let rest = self.no_short_cycle_count(n - t, m + 1);
            let p = BigRational::new(ways * rest, nf.clone());
            let lower = BigRational::new(BigInt::one(), BigInt::from(2 * m + 2) * &d);
            let upper = BigRational::new(BigInt::one(), BigInt::from(m + 1) * &d);
            let pass = lower <= p && p <= upper;
            report.check(
                format!("cycle-count law n={n} m={m} c={counts:?}"),
                pass,
                format!("P = {p}, bounds [{lower}, {upper}]"),
            );
        }
        Ok(report)
    }

    /// Partition check: the cycle-type counts of weight exactly `n` sum to `n!`.
    pub fn verify_cauchy_partition(&mut self, n_max: u64) -> Report {
        let mut report = Report::default();
        for n in 1..=n_max {
            let mut vectors = Vec::new();
            for_each_bounded_cycle_type(n as usize, n, |c| {
                let w: u64 = c.iter().enumerate().map(|(i, &x)| (i as u64 + 1) * x).sum();
                if w == n {
                    vectors.push(c.to_vec());
                }
            });
            let mut total = BigInt::zero();
            for counts in vectors {
                total += self
                    .cauchy_count(&CycleType::new(counts), n)
                    .expect("weight equals n");
            }
            let nf = self.factorial(n);
            report.check(
                format!("cycle-type partition of S_{n}"),
                total == nf,
                format!("sum of counts = {total}, n! = {nf}"),
            );
        }
        report
    }
}

/// Oracle sweep: the exact evaluation equals the factorial enumeration for
/// every 2 <= n <= n_max, 1 <= k <= n/2.
pub fn verify_oracle_equivalence(n_max: u64) -> Result<Report> {
    if n_max > BRUTE_FORCE_MAX_N {
        return Err(Error::BruteForceBudget {
            n: n_max,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut eng = ExactEngine::new();
    let mut report = Report::default();
    for n in 2..=n_max {
        for k in 1..=n / 2 {
            let exact = eng.fixed_set_probability(n, k)?;
            let brute = brute_force_probability(n, k)?;
            report.check(
                format!("oracle n={n} k={k}"),
                exact == brute,
                format!("exact {exact} vs brute {brute}"),
            );
        }
    }
    Ok(report)
}

/// Visit every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Cycle lengths of a permutation given as an image array.
pub fn cycle_lengths_of(perm: &[usize]) -> Vec<u64> {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            len += 1;
        }
        lengths.push(len);
    }
    lengths
}

/// Oracle: enumerate all `n!` permutations and return the exact fraction
/// with some subset of cycle lengths summing to `k`.
pub fn brute_force_probability(n: u64, k: u64) -> Result<ExactProb> {
    if k < 1 || 2 * k > n {
        return Err(Error::KOutOfRange { n, k });
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::BruteForceBudget {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut hits: u64 = 0;
    let mut total: u64 = 0;
    for_each_permutation(n as usize, |perm| {
        total += 1;
        let mut reach: u32 = 1;
        for len in cycle_lengths_of(perm) {
            reach |= reach << len;
        }
        if reach >> k & 1 == 1 {
            hits += 1;
        }
    });
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}
