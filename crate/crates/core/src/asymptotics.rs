//! Decay-rate layer: the exponent delta, the envelope
//! `k^(-delta) (1 + ln k)^(-3/2)`, normalized Monte Carlo scans with a
//! log-log slope fit, the rotation-average identity, the dyadic-interval
//! sum diagnostic, the ordered-simplex integral, and the even-`n`
//! half-partition demonstration.

use num_rational::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{
    brute_force_probability, cycle_lengths_of, for_each_permutation, ExactEngine, EXACT_MAX_N,
};
use crate::numeric::Kahan;
use crate::parts::subset_sums_of_parts;
use crate::poisson::harmonic;
use crate::report::Report;
use crate::sampler::{derive_seed, estimate_fixed_set, EstimatorResult, RngStream};
use serde::Serialize;

/// The decay exponent `delta = 1 - (1 + ln ln 2)/ln 2 ~ 0.08607`.
pub fn decay_exponent() -> f64 {
    let ln2 = std::f64::consts::LN_2;
    1.0 - (1.0 + ln2.ln()) / ln2
}

/// The envelope `k^(-delta) * (1 + ln k)^(-3/2)`.
pub fn envelope(k: u64) -> f64 {
    assert!(k >= 1);
    let kf = k as f64;
    let d = decay_exponent();
    kf.powf(-d) * (1.0 + kf.ln()).powf(-1.5)
}

/// Normalization that flattens estimates following the envelope:
/// `estimate * k^delta * (1 + ln k)^(3/2)`.
pub fn normalize(k: u64, estimate: f64) -> f64 {
    let kf = k as f64;
    estimate * kf.powf(decay_exponent()) * (1.0 + kf.ln()).powf(1.5)
}

/// One point of an asymptotic scan.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanRow {
    pub k: u64,
    pub n: u64,
    pub samples: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub normalized: f64,
}

/// Monte Carlo scan of the fixed-set probability over a `k` grid with
/// `n = ratio * k`. Each row draws from a seed derived from `(seed, k, n)`
/// so rows are independent and the scan is reproducible.
pub fn scan(
    k_grid: &[u64],
    n_ratio: u64,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<ScanRow>> {
    if k_grid.is_empty() {
        return Err(Error::TooFew {
            what: "grid points",
            min: 1,
            got: 0,
        });
    }
    if n_ratio < 2 {
        return Err(Error::invalid("n-ratio must be at least 2 so that k <= n/2"));
    }
    let mut rows = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let n = n_ratio
            .checked_mul(k)
            .ok_or_else(|| Error::invalid("n = ratio * k overflows"))?;
        let row_seed = derive_seed(seed, k, n);
        let est = estimate_fixed_set(n, k, samples, row_seed, workers)?;
        rows.push(ScanRow {
            k,
            n,
            samples,
            estimate: est.estimate,
            stderr: est.stderr,
            normalized: normalize(k, est.estimate),
        });
    }
    Ok(rows)
}

/// Geometric grid `start, start*factor, ...` up to `end` inclusive.
pub fn geometric_grid(start: u64, end: u64, factor: u64) -> Result<Vec<u64>> {
    if start < 1 || end < start || factor < 2 {
        return Err(Error::invalid(
            "geometric grid needs 1 <= start <= end and factor >= 2",
        ));
    }
    let mut grid = Vec::new();
    let mut k = start;
    while k <= end {
        grid.push(k);
        match k.checked_mul(factor) {
            Some(next) => k = next,
            None => break,
        }
    }
    Ok(grid)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub n_points: usize,
}

/// Ordinary least squares of `ln(estimate) + (3/2) ln(1 + ln k)` against
/// `ln k`. On data following the envelope the slope is `-delta`.
pub fn fit_exponent(rows: &[ScanRow]) -> Result<ExponentFit> {
    if rows.len() < 4 {
        return Err(Error::TooFew {
            what: "scan rows",
            min: 4,
            got: rows.len(),
        });
    }
    let mut ks: Vec<u64> = rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() != rows.len() {
        return Err(Error::invalid("scan rows must have distinct k"));
    }
    if rows.iter().any(|r| r.estimate <= 0.0) {
        return Err(Error::invalid("estimates must be positive to fit"));
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| (r.k as f64).ln()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| r.estimate.ln() + 1.5 * (1.0 + (r.k as f64).ln()).ln())
        .collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::invalid("degenerate abscissa"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(ExponentFit {
        slope,
        stderr,
        n_points: rows.len(),
    })
}

/// Average over the cyclic rotations of `x` of
/// `1 / (x_1 + x_1 x_2 + ... + x_1...x_J)`. When the product of the inputs
/// is 1, the average telescopes to exactly `1/J`.
pub fn cycle_lemma_average(x: &[f64]) -> Result<f64> {
    let j = x.len();
    if j == 0 {
        return Err(Error::TooFew {
            what: "entries",
            min: 1,
            got: 0,
        });
    }
    if x.iter().any(|&v| v <= 0.0 || v.is_nan()) {
        return Err(Error::invalid("entries must be positive"));
    }
    let product: f64 = x.iter().product();
    if (product - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "product of entries must be 1 (got {product})"
        )));
    }
    let mut acc = Kahan::new();
    for t in 0..j {
        let mut partial = 1.0f64;
        let mut denom = Kahan::new();
        for u in 0..j {
            partial *= x[(t + u) % j];
            denom.add(partial);
        }
        acc.add(1.0 / denom.sum());
    }
    Ok(acc.sum() / j as f64)
}

/// Occupancy profile of the dyadic intervals `[2^(i-1), 2^i - 1]`:
/// `b[i]` tuples drawn from interval `i+1`, with `sum b = J = b.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicProfile {
    b: Vec<u64>,
}

impl DyadicProfile {
    pub fn new(b: Vec<u64>) -> Result<Self> {
        let j = b.len() as u64;
        if j == 0 {
            return Err(Error::TooFew {
                what: "profile entries",
                min: 1,
                got: 0,
            });
        }
        if b.iter().sum::<u64>() != j {
            return Err(Error::invalid("profile entries must sum to their count"));
        }
        Ok(DyadicProfile { b })
    }

    pub fn level(&self) -> usize {
        self.b.len()
    }

    pub fn occupancies(&self) -> &[u64] {
        &self.b
    }

    /// All profiles of a given level.
    pub fn enumerate(level: usize) -> Vec<DyadicProfile> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(level);
        fn rec(left: u64, slots: usize, cur: &mut Vec<u64>, out: &mut Vec<DyadicProfile>) {
            if slots == 1 {
                cur.push(left);
                out.push(DyadicProfile { b: cur.clone() });
                cur.pop();
                return;
            }
            for v in 0..=left {
                cur.push(v);
                rec(left - v, slots - 1, cur, out);
                cur.pop();
            }
        }
        rec(level as u64, level, &mut cur, &mut out);
        out
    }
}

/// Largest `j` with `2^j <= k` (used both as the dyadic level of `k` and as
/// the dominant term count of the ordered-simplex expansion).
pub fn dyadic_level(k: u64) -> u32 {
    assert!(k >= 1);
    k.ilog2()
}

/// Harmonic mass of the dyadic interval `[2^(i-1), 2^i - 1]`; at least
/// `ln 2` for every `i`, approaching it from above.
pub fn dyadic_harmonic_slice(i: u32) -> f64 {
    assert!(i >= 1);
    if i <= 11 {
        let mut acc = Kahan::new();
        for j in (1u64 << (i - 1))..(1u64 << i) {
            acc.add(1.0 / j as f64);
        }
        return acc.sum();
    }
    // digamma difference with the asymptotic series; the gamma constants
    // cancel, leaving ln 2 plus O(2^-i) corrections
    let n = (i as f64).exp2();
    let m = n / 2.0;
    let c2 = -(1.0 / (2.0 * n) - 1.0 / (2.0 * m));
    let c12 = -(1.0 / (12.0 * n * n) - 1.0 / (12.0 * m * m));
    let c120 = (1.0 / n.powi(4) - 1.0 / m.powi(4)) / 120.0;
    let c252 = -(1.0 / n.powi(6) - 1.0 / m.powi(6)) / 252.0;
    std::f64::consts::LN_2 + c2 + c12 + c120 + c252
}

/// Exact ratio of the dyadic-interval sum
/// `sum_{d in D(b)} |subset sums of d| / (d_1 ... d_J)` to its reference
/// scale `(2 ln 2)^J / sum_i 2^(b_1+...+b_i - i)`, by full enumeration of
/// the product of dyadic intervals.
pub fn dyadic_sum_ratio(profile: &DyadicProfile) -> Result<f64> {
    let j = profile.level();
    if j > 6 {
        return Err(Error::invalid(
            "profile level must be at most 6 (enumeration budget)",
        ));
    }
    // coordinate ranges: b_1 copies of [1,1], b_2 of [2,3], ...
    let mut ranges: Vec<(u64, u64)> = Vec::with_capacity(j);
    for (idx, &count) in profile.occupancies().iter().enumerate() {
        let lo = 1u64 << idx;
        let hi = (1u64 << (idx + 1)) - 1;
        for _ in 0..count {
            ranges.push((lo, hi));
        }
    }
    debug_assert_eq!(ranges.len(), j);

    let mut lhs = Kahan::new();
    let mut tuple = vec![0u64; j];
    fn rec(depth: usize, ranges: &[(u64, u64)], tuple: &mut Vec<u64>, lhs: &mut Kahan) {
        if depth == ranges.len() {
            let total: u64 = tuple.iter().sum();
            let sums = subset_sums_of_parts(tuple, total.max(1) as usize);
            let denom: f64 = tuple.iter().map(|&d| d as f64).product();
            lhs.add(sums.len() as f64 / denom);
            return;
        }
        let (lo, hi) = ranges[depth];
        for d in lo..=hi {
            tuple[depth] = d;
            rec(depth + 1, ranges, tuple, lhs);
        }
    }
    rec(0, &ranges, &mut tuple, &mut lhs);

    let two_ln2 = 2.0 * std::f64::consts::LN_2;
    let mut denom = Kahan::new();
    let mut prefix = 0i64;
    for (idx, &count) in profile.occupancies().iter().enumerate() {
        prefix += count as i64;
        denom.add(((prefix - (idx as i64 + 1)) as f64).exp2());
    }
    let rhs = two_ln2.powi(j as i32) / denom.sum();
    Ok(lhs.sum() / rhs)
}

/// Monte Carlo value of the ordered-simplex integral
/// `int_{0 <= xi_1 <= ... <= xi_r <= 1} min_j 2^(-j) (k^(xi_1) + ... + k^(xi_j) + 1) dxi`.
/// Estimated by sorting `r` uniforms; the sorted density is `r!`, so the
/// sample mean divided by `r!` estimates the integral.
pub fn simplex_min_integral_mc(
    r: u32,
    k: u64,
    samples: u64,
    seed: u64,
) -> Result<EstimatorResult> {
    if r > 64 {
        return Err(Error::invalid("r must be at most 64"));
    }
    if k < 1 {
        return Err(Error::invalid("k must be positive"));
    }
    if r == 0 {
        // the j = 0 term is identically 1 on a zero-dimensional domain
        return Ok(EstimatorResult {
            estimate: 1.0,
            stderr: 0.0,
            samples,
            seed,
        });
    }
    if samples == 0 {
        return Err(Error::TooFew {
            what: "samples",
            min: 1,
            got: 0,
        });
    }
    let lnk = (k as f64).ln();
    let mut xi = vec![0f64; r as usize];
    let mut acc = Kahan::new();
    let mut acc_sq = Kahan::new();
    for s in 0..samples {
        let mut rng = RngStream::new(seed, s).rng();
        for v in xi.iter_mut() {
            *v = rng.random();
        }
        xi.sort_by(f64::total_cmp);
        let mut best = 1.0f64; // j = 0
        let mut prefix = 0.0f64;
        let mut scale = 1.0f64;
        for &x in &xi {
            prefix += (x * lnk).exp();
            scale *= 0.5;
            let cand = scale * (prefix + 1.0);
            if cand < best {
                best = cand;
            }
        }
        acc.add(best);
        acc_sq.add(best * best);
    }
    let n = samples as f64;
    let mean = acc.sum() / n;
    let var = ((acc_sq.sum() / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
    let r_fact: f64 = (1..=r as u64).map(|v| v as f64).product();
    Ok(EstimatorResult {
        estimate: mean / r_fact,
        stderr: (var / n).sqrt() / r_fact,
        samples,
        seed,
    })
}

/// One term of the upper expansion: `(2 h_k)^r * r! * integral`.
pub fn upper_sum_term(r: u32, k: u64, integral: f64) -> f64 {
    let hk = harmonic(k);
    let r_fact: f64 = (1..=r as u64).map(|v| v as f64).product();
    (2.0 * hk).powi(r as i32) * r_fact * integral
}

/// Demonstration for even `n`: the probability of fixing a set of size
/// `n/2` (exact for small `n`, Monte Carlo beyond) lower-bounds the
/// probability of preserving an equal-halves partition, which a brute
/// force confirms for `n <= 8`.
pub fn half_partition_demo(
    n: u64,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Report> {
    if !n.is_multiple_of(2) || n <= 2 {
        return Err(Error::invalid("n must be even and greater than 2"));
    }
    let k = n / 2;
    let mut report = Report::default();
    let (value, how) = if n <= EXACT_MAX_N {
        let mut eng = ExactEngine::new();
        let p = eng.fixed_set_probability(n, k)?;
        let v = rational_to_f64(&p);
        (v, format!("exact {p}"))
    } else {
        let est = estimate_fixed_set(n, k, samples, seed, workers)?;
        (
            est.estimate,
            format!("monte carlo, stderr {:.2e}, seed {}", est.stderr, est.seed),
        )
    };
    let env = envelope(k);
    report.pass(
        format!("half-set probability n={n}"),
        format!(
            "i(n, n/2) = {value:.6} ({how}); envelope(n/2) = {env:.6}; ratio = {:.3}",
            value / env
        ),
    );

    if n <= 8 {
        let nn = n as usize;
        // canonical representatives: half-size subsets containing point 0
        let mut halves: Vec<u32> = Vec::new();
        for mask in 0u32..(1 << nn) {
            if mask & 1 == 1 && mask.count_ones() == k as u32 {
                halves.push(mask);
            }
        }
        let full: u32 = (1 << nn) - 1;
        let mut preserving = 0u64;
        let mut fixing = 0u64;
        let mut total = 0u64;
        for_each_permutation(nn, |perm| {
            total += 1;
            let image = |mask: u32| -> u32 {
                let mut out = 0u32;
                for (from, &to) in perm.iter().enumerate() {
                    if mask >> from & 1 == 1 {
                        out |= 1 << to;
                    }
                }
                out
            };
            let mut preserves = false;
            let mut fixes = false;
            for &b in &halves {
                let im = image(b);
                if im == b {
                    preserves = true;
                    fixes = true;
                    break;
                }
                if im == full ^ b {
                    preserves = true;
                }
            }
            // a permutation may fix a half-set whose representative does
            // not contain 0; the complement does
            let _ = fixes;
            if preserves {
                preserving += 1;
            }
            let mut sums: u32 = 1;
            for len in cycle_lengths_of(perm) {
                sums |= sums << len;
            }
            if sums >> k & 1 == 1 {
                fixing += 1;
            }
        });
        let exact = ExactEngine::new().fixed_set_probability(n, k)?;
        let brute = brute_force_probability(n, k)?;
        report.check(
            format!("oracle agreement n={n}"),
            exact == brute,
            format!("exact {exact} vs brute force {brute}"),
        );
        let fixing_ratio = BigRational::new(fixing.into(), total.into());
        report.check(
            format!("fixing count matches n={n}"),
            fixing_ratio == exact,
            format!("{fixing}/{total}"),
        );
        report.check(
            format!("partition-preserving superset n={n}"),
            BigRational::new(preserving.into(), total.into()) >= exact,
            format!("preserving {preserving}/{total} >= fixing {fixing}/{total}"),
        );
    }
    Ok(report)
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rotation-average identity on random product-one instances: entries are
/// built as ratios of consecutive uniforms so the cyclic product is 1, and
/// every average must equal 1/J to within 1e-12.
pub fn verify_rotation_average(instances: u64, max_j: usize, seed: u64) -> Result<Report> {
    if max_j < 1 {
        return Err(Error::invalid("max J must be positive"));
    }
    let mut report = Report::default();
    for inst in 0..instances {
        let mut rng = RngStream::new(seed, inst).rng();
        let j = 1 + (inst % max_j as u64) as usize;
        let u: Vec<f64> = (0..j).map(|_| rng.random::<f64>() + 0.05).collect();
        let x: Vec<f64> = (0..j).map(|t| u[t] / u[(t + 1) % j]).collect();
        let avg = cycle_lemma_average(&x)?;
        let dev = (avg - 1.0 / j as f64).abs();
        report.check(
            format!("rotation average #{inst} J={j}"),
            dev <= 1e-12,
            format!("|avg - 1/J| = {dev:.2e}"),
        );
    }
    Ok(report)
}

/// Exhaustive dyadic-ratio sweep over all occupancy profiles up to
/// `max_level`, logging the minimum. Asserts positivity only; the hidden
/// reference constant is not published, so no level is pinned.
pub fn verify_dyadic_ratio(max_level: usize) -> Result<Report> {
    if !(1..=6).contains(&max_level) {
        return Err(Error::invalid("level must lie in 1..=6"));
    }
    let mut report = Report::default();
    let mut min_ratio = f64::INFINITY;
    for level in 1..=max_level {
        for p in DyadicProfile::enumerate(level) {
            let r = dyadic_sum_ratio(&p)?;
            min_ratio = min_ratio.min(r);
            report.check(
                format!("dyadic ratio b={:?}", p.occupancies()),
                r > 0.0,
                format!("ratio = {r:.4}"),
            );
        }
    }
    report.check(
        "dyadic ratio minimum",
        min_ratio > 0.0,
        format!("minimum observed ratio = {min_ratio:.4}"),
    );
    Ok(report)
}
