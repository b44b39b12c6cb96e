//! Exact rational identities relating the cycle-type and part-list forms of
//! the subset-sum weights, and the translate bound on sum-set sizes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use fixset::cycle::{for_each_bounded_cycle_type, subset_sums, CycleType};
use fixset::parts::subset_sums_of_parts;

fn big_fact(n: u64) -> BigInt {
    (1..=n).map(BigInt::from).product::<BigInt>().max(BigInt::one())
}

/// `prod_i c_i! * i^(c_i)` for a multiplicity vector.
fn type_weight_denom(counts: &[u64]) -> BigInt {
    let mut d = BigInt::one();
    for (idx, &c) in counts.iter().enumerate() {
        if c > 0 {
            d *= big_fact(c) * BigInt::from(idx + 1).pow(c as u32);
        }
    }
    d
}

fn sumset_size_of_type(counts: &[u64]) -> u64 {
    let c = CycleType::new(counts.to_vec());
    let cap = c.weight().max(1) as usize;
    subset_sums(&c, cap).len() as u64
}

fn sumset_size_of_parts(parts: &[u64]) -> u64 {
    let cap = parts.iter().sum::<u64>().max(1) as usize;
    subset_sums_of_parts(parts, cap).len() as u64
}

/// Visit all tuples in `[1..=k]^r`.
fn for_each_tuple(k: u64, r: usize, mut f: impl FnMut(&[u64])) {
    let mut cur = vec![1u64; r];
    loop {
        f(&cur);
        let mut pos = r;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if cur[pos] < k {
                cur[pos] += 1;
                for v in cur[pos + 1..].iter_mut() {
                    *v = 1;
                }
                break;
            }
        }
    }
}

/// Grouping tuples by their multiplicity vector: summing
/// `|sums|/prod(parts)` over ordered tuples equals `r!` times the sum of
/// `|sums| / prod(c_i! i^(c_i))` over multiplicity vectors with `r` parts.
#[test]
fn tuple_sum_equals_type_sum() {
    for k in 1..=6u64 {
        for r in 1..=4usize {
            // cycle-type side
            let mut lhs = BigRational::zero();
            for_each_bounded_cycle_type(k as usize, k * r as u64, |counts| {
                if counts.iter().sum::<u64>() == r as u64 {
                    let size = sumset_size_of_type(counts);
                    lhs += BigRational::new(BigInt::from(size), type_weight_denom(counts));
                }
            });
            // ordered-tuple side
            let mut rhs = BigRational::zero();
            for_each_tuple(k, r, |a| {
                let size = sumset_size_of_parts(a);
                let denom: BigInt = a.iter().map(|&x| BigInt::from(x)).product();
                rhs += BigRational::new(BigInt::from(size), denom);
            });
            rhs /= BigRational::from_integer(big_fact(r as u64));
            assert_eq!(lhs, rhs, "k={k} r={r}");
        }
    }
}

/// Visit all compositions of `total` into `slots` non-negative parts.
fn for_each_composition(total: u64, slots: usize, mut f: impl FnMut(&[u64])) {
    fn rec(left: u64, slots: usize, cur: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        if slots == 1 {
            cur.push(left);
            f(cur);
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(left - v, slots - 1, cur, f);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(slots);
    rec(total, slots, &mut cur, &mut f);
}

/// Grouping tuples over `[1, 2^J - 1]` by how many coordinates land in each
/// dyadic interval `[2^(i-1), 2^i - 1]`.
#[test]
fn tuple_sum_splits_over_dyadic_blocks() {
    for j_level in 1..=3usize {
        let top = (1u64 << j_level) - 1;
        for r in 1..=4usize {
            let mut lhs = BigRational::zero();
            for_each_tuple(top, r, |a| {
                let size = sumset_size_of_parts(a);
                let denom: BigInt = a.iter().map(|&x| BigInt::from(x)).product();
                lhs += BigRational::new(BigInt::from(size), denom);
            });
            lhs /= BigRational::from_integer(big_fact(r as u64));

            let mut rhs = BigRational::zero();
            for_each_composition(r as u64, j_level, |b| {
                // block product: b[i] coordinates from [2^i, 2^(i+1) - 1]
                let mut ranges = Vec::new();
                for (i, &count) in b.iter().enumerate() {
                    for _ in 0..count {
                        ranges.push((1u64 << i, (1u64 << (i + 1)) - 1));
                    }
                }
                let mut inner = BigRational::zero();
                let mut tuple = vec![0u64; r];
                fn rec(
                    depth: usize,
                    ranges: &[(u64, u64)],
                    tuple: &mut Vec<u64>,
                    inner: &mut BigRational,
                ) {
                    if depth == ranges.len() {
                        let size = sumset_size_of_parts(tuple);
                        let denom: BigInt = tuple.iter().map(|&x| BigInt::from(x)).product();
                        *inner += BigRational::new(BigInt::from(size), denom);
                        return;
                    }
                    let (lo, hi) = ranges[depth];
                    for d in lo..=hi {
                        tuple[depth] = d;
                        rec(depth + 1, ranges, tuple, inner);
                    }
                }
                rec(0, &ranges, &mut tuple, &mut inner);
                let coeff: BigInt = b.iter().map(|&x| big_fact(x)).product();
                rhs += inner / BigRational::from_integer(coeff);
            });
            assert_eq!(lhs, rhs, "J={j_level} r={r}");
        }
    }
}

/// Zeroing a subset of coordinates shrinks the sum set by at most the
/// product of the zeroed multiplicities plus one (translate covering).
#[test]
fn translate_bound_exhaustive_small_weight() {
    let mut checked = 0u64;
    for_each_bounded_cycle_type(12, 12, |counts| {
        let support: Vec<usize> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
            .collect();
        let full_size = sumset_size_of_type(counts);
        for subset in 0u32..(1 << support.len()) {
            let mut reduced = counts.to_vec();
            let mut factor = 1u64;
            for (bit, &idx) in support.iter().enumerate() {
                if subset >> bit & 1 == 1 {
                    factor *= counts[idx] + 1;
                    reduced[idx] = 0;
                }
            }
            let reduced_size = sumset_size_of_type(&reduced);
            assert!(
                full_size <= reduced_size * factor,
                "counts={counts:?} subset={subset:b}: {full_size} > {reduced_size} * {factor}"
            );
            checked += 1;
        }
    });
    assert!(checked > 500, "exhausted only {checked} cases");
}
