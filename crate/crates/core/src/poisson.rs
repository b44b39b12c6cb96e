//! The independent-Poisson cycle model: cycle counts of length `i` follow
//! independent Poisson(1/i) laws. Exact evaluation of the limiting
//! fixed-set probability by a sumset-state dynamic program, two-sided
//! bracketing of the expected subset-sum-set size at small `k`, harmonic
//! numbers, and Poisson moment helpers.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::bitset::SumSet;
use crate::error::{Error, Result};
use crate::numeric::{Accum, Kahan, TwoFloat};
use crate::report::Report;
use crate::sampler::{sample_poisson_counts, RngStream};

/// The limiting law of the small-cycle counts: lengths `1..=k` carry
/// independent Poisson(1/i) multiplicities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PoissonCycleLaw {
    k: u64,
}

impl PoissonCycleLaw {
    pub fn new(k: u64) -> Result<Self> {
        if k < 1 {
            return Err(Error::invalid("k must be positive"));
        }
        Ok(PoissonCycleLaw { k })
    }

    pub fn k(self) -> u64 {
        self.k
    }

    /// Rate of the length-`i` count, `1/i`.
    pub fn rate(self, i: u64) -> f64 {
        assert!(i >= 1 && i <= self.k, "length out of range");
        1.0 / i as f64
    }

    pub fn rates(self) -> impl Iterator<Item = f64> {
        (1..=self.k).map(|i| 1.0 / i as f64)
    }

    /// Sum of all rates: the harmonic number of `k`.
    pub fn total_rate(self) -> f64 {
        harmonic(self.k)
    }
}

/// Probability mass `P(X = c)` for `X ~ Poisson(1/i)`.
pub fn poisson_pmf(i: u64, c: u64) -> f64 {
    assert!(i >= 1);
    poisson_pmf_rate(1.0 / i as f64, c)
}

pub(crate) fn poisson_pmf_rate(lambda: f64, c: u64) -> f64 {
    let mut p = (-lambda).exp();
    for j in 1..=c {
        p *= lambda / j as f64;
    }
    p
}

/// Upper tail `P(X >= b)` for `X ~ Poisson(lambda)`, summed directly so
/// tiny tails keep full relative accuracy.
pub fn poisson_tail_rate(lambda: f64, b: u64) -> f64 {
    if b == 0 {
        return 1.0;
    }
    let mut term = poisson_pmf_rate(lambda, b);
    let mut total = term;
    let mut j = b;
    loop {
        j += 1;
        term *= lambda / j as f64;
        total += term;
        if term < total * 1e-17 || term < 1e-320 {
            break;
        }
    }
    total
}

/// Harmonic number `1 + 1/2 + ... + 1/k` by compensated summation.
pub fn harmonic(k: u64) -> f64 {
    let mut acc = Kahan::new();
    for i in 1..=k {
        acc.add(1.0 / i as f64);
    }
    acc.sum()
}

/// Bell numbers via the Bell triangle.
pub fn bell_number(m: usize) -> BigUint {
    let mut row = vec![BigUint::from(1u32)];
    for _ in 0..m {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().unwrap().clone());
        for v in &row {
            let last = next.last().unwrap().clone();
            next.push(last + v);
        }
        row = next;
    }
    row[0].clone()
}

/// Touchard polynomial `phi_m(lambda)`: the m-th moment of Poisson(lambda).
/// Recurrence `phi_{m+1} = lambda * sum_j C(m,j) phi_j`, `phi_0 = 1`.
pub fn touchard(m: usize, lambda: f64) -> f64 {
    let mut phi = vec![1.0f64];
    for n in 0..m {
        // binomials C(n, j) built incrementally
        let mut binom = 1.0f64;
        let mut sum = 0.0f64;
        for (j, &p) in phi.iter().enumerate().take(n + 1) {
            if j > 0 {
                binom = binom * (n - j + 1) as f64 / j as f64;
            }
            sum += binom * p;
        }
        phi.push(lambda * sum);
    }
    phi[m]
}

/// Largest `k` the exact limit DP accepts. Beyond this the state space
/// outgrows a desktop memory budget; use the Monte Carlo estimator.
pub const LIMIT_DP_MAX_K: u64 = 26;

#[derive(Clone, Copy, Debug)]
pub struct LimitDp {
    pub value: f64,
    /// Largest deviation of the total live probability from 1 seen at any
    /// stage of the DP.
    pub max_drift: f64,
    /// Peak number of distinct sum-set states.
    pub max_states: usize,
}

/// Limiting probability that the subset sums of the Poisson cycle counts
/// hit `k` exactly (the `n -> infinity` fixed-set probability).
pub fn limit_probability(k: u64) -> Result<f64> {
    Ok(limit_probability_detailed(k)?.value)
}

pub fn limit_probability_detailed(k: u64) -> Result<LimitDp> {
    guard_limit(k)?;
    Ok(limit_dp_impl::<f64>(k, 0))
}

/// Extended-precision variant: per-state probabilities carried as
/// double-doubles. Slower; exposed behind a config flag in the CLI.
pub fn limit_probability_extended(k: u64) -> Result<LimitDp> {
    guard_limit(k)?;
    Ok(limit_dp_impl::<TwoFloat>(k, 0))
}

/// Diagnostic: run the DP with every per-length branch cap raised by
/// `extra`. The lumped tail makes the caps exact, so the value must not
/// move (up to float noise); tests rely on this.
pub fn limit_probability_with_caps(k: u64, extra: u64) -> Result<LimitDp> {
    guard_limit(k)?;
    Ok(limit_dp_impl::<f64>(k, extra))
}

fn guard_limit(k: u64) -> Result<()> {
    if !(1..=LIMIT_DP_MAX_K).contains(&k) {
        return Err(Error::LimitEnvelope {
            k,
            max: LIMIT_DP_MAX_K,
        });
    }
    Ok(())
}

/// Branch weights for one length: exact pmf for `0..b` copies and a lumped
/// tail `P(X >= b)` computed by complement, so the weights sum to 1.
fn branch_weights(i: u64, b: u64) -> Vec<f64> {
    let lambda = 1.0 / i as f64;
    let mut w = Vec::with_capacity(b as usize + 1);
    let mut p = (-lambda).exp();
    let mut cum = Kahan::new();
    for c in 0..b {
        if c > 0 {
            p *= lambda / c as f64;
        }
        w.push(p);
        cum.add(p);
    }
    w.push((1.0 - cum.sum()).max(0.0));
    w
}

fn limit_dp_impl<A: Accum>(k: u64, extra: u64) -> LimitDp {
    let kk = k as usize;
    let full: u128 = (1u128 << (kk + 1)) - 1;
    // BTreeMap keeps the merge and extraction order deterministic.
    let mut states: BTreeMap<u128, A> = BTreeMap::new();
    states.insert(1, A::one());
    let mut max_states = 1usize;
    let mut max_drift = 0.0f64;
    // Large lengths first: their branch caps are small, so the state set
    // grows slowly in the early stages.
    for i in (1..=kk).rev() {
        let b = kk.div_ceil(i); // ceil(k/i): further copies cannot move bits <= k
        let weights = branch_weights(i as u64, b as u64 + extra);
        let mut next: BTreeMap<u128, A> = BTreeMap::new();
        for (&mask, &p) in &states {
            let mut m = mask;
            for (c, &wc) in weights.iter().enumerate() {
                if c > 0 {
                    m |= (m << i) & full;
                }
                if wc > 0.0 {
                    let add = p.mul_f64(wc);
                    next.entry(m).and_modify(|e| e.add(add)).or_insert(add);
                }
            }
        }
        states = next;
        max_states = max_states.max(states.len());
        let mut total = Kahan::new();
        for v in states.values() {
            total.add(v.to_f64());
        }
        max_drift = max_drift.max((total.sum() - 1.0).abs());
    }
    let mut hit = Kahan::new();
    for (mask, v) in &states {
        if mask >> kk & 1 == 1 {
            hit.add(v.to_f64());
        }
    }
    LimitDp {
        value: hit.sum(),
        max_drift,
        max_states,
    }
}

/// Largest `k` accepted by the exact bracketing of the expected
/// subset-sum-set size.
pub const BRACKET_MAX_K: u64 = 8;

/// A weight cap comfortably past the mass enumerated at the default
/// thresholds; the tail beyond it is absorbed into the analytic bounds.
pub fn recommended_bracket_cap(k: u64) -> usize {
    256 + 32 * k as usize
}

/// Two-sided bounds on the expected subset-sum-set size of the Poisson
/// cycle counts. Enumerates every count vector whose probability stays
/// above an internal threshold; the unenumerated mass is bounded above by
/// `E[min(2^(X_1+...+X_k), 1 + X_1 + 2X_2 + ... + kX_k)]` restricted to the
/// pruned event, and below by mass times 1. The threshold is tightened
/// until the bracket width is at most 1e-6 (given a sufficient `cap`).
pub fn expected_sumset_size_brackets(k: u64, cap: usize) -> Result<(f64, f64)> {
    if !(1..=BRACKET_MAX_K).contains(&k) {
        return Err(Error::BracketEnvelope {
            k,
            max: BRACKET_MAX_K,
        });
    }
    if cap < k as usize {
        return Err(Error::invalid("cap must be at least k"));
    }
    let mut theta = 1e-13;
    let mut best = bracket_pass(k, cap, theta);
    for _ in 0..3 {
        if best.1 - best.0 <= 1e-6 {
            break;
        }
        theta *= 1e-2;
        best = bracket_pass(k, cap, theta);
    }
    Ok(best)
}

struct BracketCtx {
    k: usize,
    cap: usize,
    theta: f64,
    h: Vec<f64>, // h[i] = 1 + 1/2 + ... + 1/i
    lower: Kahan,
    upper: Kahan,
    stack: Vec<SumSet>,
}

fn bracket_pass(k: u64, cap: usize, theta: f64) -> (f64, f64) {
    let kk = k as usize;
    let mut h = vec![0.0f64; kk + 1];
    let mut acc = Kahan::new();
    for (i, slot) in h.iter_mut().enumerate().skip(1) {
        acc.add(1.0 / i as f64);
        *slot = acc.sum();
    }
    let mut ctx = BracketCtx {
        k: kk,
        cap,
        theta,
        h,
        lower: Kahan::new(),
        upper: Kahan::new(),
        stack: vec![SumSet::zero(cap); kk + 1],
    };
    bracket_rec(&mut ctx, 1, 1.0, 0, 0);
    (ctx.lower.sum(), ctx.upper.sum())
}

fn bracket_rec(ctx: &mut BracketCtx, i: usize, prob: f64, s_prefix: u64, y_prefix: u64) {
    if i > ctx.k {
        let size = ctx.stack[ctx.k].len() as f64;
        ctx.lower.add(prob * size);
        ctx.upper.add(prob * size);
        return;
    }
    let lambda = 1.0 / i as f64;
    {
        let (parents, rest) = ctx.stack.split_at_mut(i);
        rest[0].copy_from(&parents[i - 1]);
    }
    let mut c: u64 = 0;
    let mut pmf = (-lambda).exp();
    loop {
        let s2 = s_prefix + i as u64 * c;
        let tail_before = if c == 0 {
            1.0
        } else {
            poisson_tail_rate(lambda, c - 1)
        };
        if prob * tail_before < ctx.theta || s2 as usize > ctx.cap {
            break;
        }
        if c > 0 {
            ctx.stack[i].or_shift(i);
        }
        bracket_rec(ctx, i + 1, prob * pmf, s2, y_prefix + c);
        c += 1;
        pmf *= lambda / c as f64;
    }
    // Everything with X_i >= c at this prefix is bounded, not enumerated.
    let b = c;
    let t_b = poisson_tail_rate(lambda, b);
    if t_b <= 0.0 {
        return;
    }
    let t_bm1 = if b == 0 {
        1.0
    } else {
        poisson_tail_rate(lambda, b - 1)
    };
    ctx.lower.add(prob * t_b);
    // linear route: E[(1 + S) 1_A]; E[S beyond i] = k - i, and
    // i * E[X_i; X_i >= b] = P(X_i >= b-1) since i * lambda = 1.
    let bound_linear =
        prob * (t_b * (1.0 + s_prefix as f64 + (ctx.k - i) as f64) + t_bm1);
    // doubling route: E[2^Y 1_A]; E[2^{X_i}; X_i >= b] = e^lambda P(Pois(2 lambda) >= b)
    // and prod_{j>i} E 2^{X_j} = exp(h_k - h_i).
    let bound_doubling = prob
        * (y_prefix as f64 * std::f64::consts::LN_2).exp()
        * lambda.exp()
        * poisson_tail_rate(2.0 * lambda, b)
        * (ctx.h[ctx.k] - ctx.h[i]).exp();
    ctx.upper.add(bound_linear.min(bound_doubling));
}

/// Monte Carlo check of the mixed-moment bound
/// `E[|L| X_j] <= (3/j) E|L|` for the subset-sum-set size `|L|` of the
/// Poisson cycle counts, at four combined standard errors. All indices in
/// `js` share one sample stream.
pub fn check_moment_bound(k: u64, js: &[u64], samples: u64, seed: u64) -> Result<Report> {
    if js.is_empty() {
        return Err(Error::TooFew {
            what: "moment indices",
            min: 1,
            got: 0,
        });
    }
    let mut uniq = js.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.len() != js.len() {
        return Err(Error::invalid("moment indices must be distinct"));
    }
    if js.iter().any(|&j| j < 1 || j > k) {
        return Err(Error::invalid("moment indices must lie in 1..=k"));
    }
    if samples == 0 {
        return Err(Error::TooFew {
            what: "samples",
            min: 1,
            got: 0,
        });
    }

    let m = js.len();
    let mut sum_vx = vec![0u128; m];
    let mut sum_v2x2 = vec![0u128; m];
    let mut sum_v2x = vec![0u128; m];
    let mut sum_v: u128 = 0;
    let mut sum_v2: u128 = 0;
    let mut bits = SumSet::zero(64);
    for s in 0..samples {
        let mut rng = RngStream::new(seed, s).rng();
        let counts = sample_poisson_counts(k, &mut rng);
        let weight = counts.weight().max(1) as usize;
        bits.grow_cap(weight);
        bits.clear();
        for (idx, &cnt) in counts.counts().iter().enumerate() {
            if cnt > 0 {
                bits.add_part(idx + 1, cnt);
            }
        }
        let v = bits.len() as u128;
        sum_v += v;
        sum_v2 += v * v;
        for (ji, &j) in js.iter().enumerate() {
            let x = counts.count_of(j as usize) as u128;
            sum_vx[ji] += v * x;
            sum_v2x2[ji] += v * v * x * x;
            sum_v2x[ji] += v * v * x;
        }
    }

    let n = samples as f64;
    let mut report = Report::default();
    for (ji, &j) in js.iter().enumerate() {
        let r = 3.0 / j as f64;
        let mean_d = (sum_vx[ji] as f64 - r * sum_v as f64) / n;
        let e_d2 =
            (sum_v2x2[ji] as f64 - 2.0 * r * sum_v2x[ji] as f64 + r * r * sum_v2 as f64) / n;
        let var = (e_d2 - mean_d * mean_d).max(0.0);
        let se = (var / n).sqrt();
        let pass = if se > 0.0 {
            mean_d <= 4.0 * se
        } else {
            mean_d <= 0.0
        };
        let z = if se > 0.0 { mean_d / se } else { 0.0 };
        report.check(
            format!("moment bound k={k} j={j}"),
            pass,
            format!(
                "E[|L|X_j] = {:.6}, (3/j) E|L| = {:.6}, margin z = {:.2}",
                sum_vx[ji] as f64 / n,
                r * sum_v as f64 / n,
                z
            ),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIMIT_1: f64 = 1.0 - std::f64::consts::E.recip() * 1.0; // 1 - 1/e

    fn limit_2() -> f64 {
        1.0 - 2.0 * (-1.5f64).exp()
    }

    #[test]
    fn pmf_values() {
        assert!((poisson_pmf(1, 0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((poisson_pmf(2, 1) - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((poisson_pmf(2, 1) - 0.303265).abs() < 1e-6);
    }

    #[test]
    fn pmf_normalizes() {
        for i in [1u64, 2, 5, 17] {
            let total: f64 = (0..80).map(|c| poisson_pmf(i, c)).sum();
            assert!((total - 1.0).abs() < 1e-13, "i={i}");
        }
    }

    #[test]
    fn tail_complementarity() {
        for b in 0..12u64 {
            let head: f64 = (0..b).map(|c| poisson_pmf_rate(0.7, c)).sum();
            let tail = poisson_tail_rate(0.7, b);
            assert!((head + tail - 1.0).abs() < 1e-13, "b={b}");
        }
    }

    #[test]
    fn harmonic_small_values() {
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_bounds_up_to_a_million() {
        let mut acc = Kahan::new();
        for k in 1..=1_000_000u64 {
            acc.add(1.0 / k as f64);
            let h = acc.sum();
            let lo = ((k + 1) as f64).ln();
            let hi = 1.0 + (k as f64).ln();
            assert!(lo <= h + 1e-12 && h <= hi + 1e-12, "k={k} h={h}");
        }
    }

    #[test]
    fn bell_sequence() {
        let want = [1u32, 1, 2, 5, 15, 52, 203, 877];
        for (m, &w) in want.iter().enumerate() {
            assert_eq!(bell_number(m), BigUint::from(w), "m={m}");
        }
    }

    #[test]
    fn touchard_values() {
        // phi_2(lambda) = lambda + lambda^2
        assert!((touchard(2, 1.0 / 3.0) - (1.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-12);
        for m in 0..=10 {
            let bell: f64 = bell_number(m).to_string().parse().unwrap();
            assert!(
                (touchard(m, 1.0) - bell).abs() < bell * 1e-10,
                "phi_{m}(1) vs Bell"
            );
        }
    }

    #[test]
    fn touchard_bounded_by_lambda_bell() {
        for m in 1..=6 {
            for &lambda in &[0.1, 0.25, 0.5, 0.9, 1.0] {
                let bell: f64 = bell_number(m).to_string().parse().unwrap();
                assert!(
                    touchard(m, lambda) <= lambda * bell + 1e-12,
                    "m={m} lambda={lambda}"
                );
            }
        }
    }

    #[test]
    fn limit_closed_forms() {
        assert!((limit_probability(1).unwrap() - LIMIT_1).abs() < 1e-10);
        assert!((limit_probability(2).unwrap() - limit_2()).abs() < 1e-10);
        assert!((limit_probability(1).unwrap() - 0.6321).abs() < 1e-4);
        assert!((limit_probability(2).unwrap() - 0.5537).abs() < 1e-4);
    }

    #[test]
    fn limit_decreasing_small() {
        let mut prev = f64::INFINITY;
        for k in 1..=12u64 {
            let v = limit_probability(k).unwrap();
            assert!(v < prev - 1e-12, "k={k}");
            assert!(v > 0.0 && v < 1.0);
            prev = v;
        }
    }

    #[test]
    fn limit_drift_tiny() {
        for k in [1u64, 5, 10, 16] {
            let dp = limit_probability_detailed(k).unwrap();
            assert!(dp.max_drift < 1e-9, "k={k} drift={}", dp.max_drift);
        }
    }

    #[test]
    fn limit_cap_sufficiency() {
        for k in 1..=10u64 {
            let base = limit_probability_detailed(k).unwrap().value;
            let wide = limit_probability_with_caps(k, 3).unwrap().value;
            assert!((base - wide).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn limit_extended_matches_plain() {
        for k in [1u64, 4, 9, 14] {
            let plain = limit_probability(k).unwrap();
            let wide = limit_probability_extended(k).unwrap().value;
            assert!((plain - wide).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn limit_envelope_enforced() {
        const { assert!(LIMIT_DP_MAX_K >= 20) };
        assert!(matches!(
            limit_probability(LIMIT_DP_MAX_K + 1),
            Err(Error::LimitEnvelope { .. })
        ));
        assert!(limit_probability(0).is_err());
    }

    #[test]
    fn brackets_k1_is_two() {
        let (lo, hi) = expected_sumset_size_brackets(1, recommended_bracket_cap(1)).unwrap();
        assert!(hi - lo <= 1e-6, "gap {}", hi - lo);
        assert!(lo <= 2.0 && 2.0 <= hi, "[{lo}, {hi}]");
    }

    #[test]
    fn brackets_k2_closed_form() {
        // case analysis on the first coordinate gives 3 - 1/(2e)
        let want = 3.0 - 0.5 * (-1.0f64).exp();
        let (lo, hi) = expected_sumset_size_brackets(2, recommended_bracket_cap(2)).unwrap();
        assert!(hi - lo <= 1e-6, "gap {}", hi - lo);
        assert!(lo <= want && want <= hi, "[{lo}, {hi}] vs {want}");
    }

    #[test]
    fn brackets_envelope() {
        assert!(matches!(
            expected_sumset_size_brackets(9, 512),
            Err(Error::BracketEnvelope { .. })
        ));
    }

    #[test]
    fn moment_bound_k1_wide_margin() {
        // E[(X+1)X] = 3 for Poisson(1), against the bound 3 * E(X+1) = 6.
        let report = check_moment_bound(1, &[1], 200_000, 7).unwrap();
        assert!(report.all_pass(), "{:?}", report.checks);
    }

    #[test]
    fn moment_bound_validates_input() {
        assert!(check_moment_bound(4, &[], 10, 0).is_err());
        assert!(check_moment_bound(4, &[2, 2], 10, 0).is_err());
        assert!(check_moment_bound(4, &[5], 10, 0).is_err());
    }
}
