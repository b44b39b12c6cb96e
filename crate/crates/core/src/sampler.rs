//! Seeded Monte Carlo engines.
//!
//! Every estimator draws sample `s` from its own substream `(seed, s)` of a
//! counter-based generator and reduces integer totals, so results are a
//! pure function of `(inputs, seed, samples)` no matter how many worker
//! threads run the sample range.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitset::SumSet;
use crate::cycle::CycleType;
use crate::error::{Error, Result};

/// One independent substream of the counter-based generator: `(seed,
/// stream_id)` fully determines the output sequence.
#[derive(Clone, Copy, Debug)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// SplitMix64 finalizer; used to derive independent per-row seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic seed for a tagged sub-experiment of a master seed.
pub fn derive_seed(seed: u64, tag_a: u64, tag_b: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag_a ^ splitmix64(tag_b)))
}

/// Monte Carlo point estimate with its standard error and provenance.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Cycle lengths `<= k` of a uniform random permutation of `n` points,
/// sampled exactly by stick breaking: the cycle through a marked point has
/// length uniform on `1..=remaining`; recurse on the rest. Cost is the
/// number of cycles, so `n` may be as large as 10^9.
pub fn sample_cycle_lengths_at_most<R: Rng + ?Sized>(n: u64, k: u64, rng: &mut R) -> Vec<u64> {
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    let mut out = Vec::new();
    let mut rem = n;
    while rem > 0 {
        let len = rng.random_range(1..=rem);
        if len <= k {
            out.push(len);
        }
        rem -= len;
    }
    out.sort_unstable();
    out
}

/// Draw `X ~ Poisson(lambda)` by sequential inversion; exact for rates
/// `<= 1`. `p0` must equal `exp(-lambda)`.
fn poisson_draw<R: Rng + ?Sized>(lambda: f64, p0: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    if u < p0 {
        return 0;
    }
    let mut c = 0u64;
    let mut p = p0;
    let mut cum = p0;
    while u >= cum && c < 500 {
        c += 1;
        p *= lambda / c as f64;
        cum += p;
    }
    c
}

/// Independent draws `X_1..X_k` with `X_i ~ Poisson(1/i)`.
pub fn sample_poisson_counts<R: Rng + ?Sized>(k: u64, rng: &mut R) -> CycleType {
    assert!(k >= 1);
    let mut counts = vec![0u64; k as usize];
    for i in 1..=k {
        let lambda = 1.0 / i as f64;
        counts[i as usize - 1] = poisson_draw(lambda, (-lambda).exp(), rng);
    }
    CycleType::new(counts)
}

fn split_ranges(samples: u64, workers: usize) -> Vec<std::ops::Range<u64>> {
    let w = workers.max(1) as u64;
    let w = w.min(samples.max(1));
    let base = samples / w;
    let extra = samples % w;
    let mut ranges = Vec::with_capacity(w as usize);
    let mut start = 0u64;
    for i in 0..w {
        let len = base + if i < extra { 1 } else { 0 };
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}

/// Run an indicator kernel over the sample index range, partitioned across
/// workers; the reduction is an exact integer count, so the result does not
/// depend on the partition.
fn parallel_count<S, F, G>(samples: u64, workers: usize, make_scratch: G, body: F) -> u64
where
    S: Send,
    F: Fn(u64, &mut S) -> bool + Sync,
    G: Fn() -> S + Sync,
{
    let ranges = split_ranges(samples, workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|range| {
                let body = &body;
                let make_scratch = &make_scratch;
                scope.spawn(move || {
                    let mut scratch = make_scratch();
                    let mut hits = 0u64;
                    for s in range {
                        if body(s, &mut scratch) {
                            hits += 1;
                        }
                    }
                    hits
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampler worker panicked"))
            .sum()
    })
}

/// As [`parallel_count`] but accumulating a value and its square per sample
/// as exact integers.
fn parallel_totals<S, F, G>(samples: u64, workers: usize, make_scratch: G, body: F) -> (u128, u128)
where
    S: Send,
    F: Fn(u64, &mut S) -> u64 + Sync,
    G: Fn() -> S + Sync,
{
    let ranges = split_ranges(samples, workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|range| {
                let body = &body;
                let make_scratch = &make_scratch;
                scope.spawn(move || {
                    let mut scratch = make_scratch();
                    let mut total = 0u128;
                    let mut total_sq = 0u128;
                    for s in range {
                        let v = body(s, &mut scratch) as u128;
                        total += v;
                        total_sq += v * v;
                    }
                    (total, total_sq)
                })
            })
            .collect();
        let mut total = 0u128;
        let mut total_sq = 0u128;
        for h in handles {
            let (t, t2) = h.join().expect("sampler worker panicked");
            total += t;
            total_sq += t2;
        }
        (total, total_sq)
    })
}

fn indicator_result(hits: u64, samples: u64, seed: u64) -> EstimatorResult {
    let p = hits as f64 / samples as f64;
    EstimatorResult {
        estimate: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        seed,
    }
}

fn mean_result(total: u128, total_sq: u128, samples: u64, seed: u64) -> EstimatorResult {
    let n = samples as f64;
    let mean = total as f64 / n;
    let var = if samples > 1 {
        ((total_sq as f64 - (total as f64) * (total as f64) / n) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    EstimatorResult {
        estimate: mean,
        stderr: (var / n).sqrt(),
        samples,
        seed,
    }
}

fn validate_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::TooFew {
            what: "samples",
            min: 1,
            got: 0,
        });
    }
    Ok(())
}

/// Monte Carlo estimate of the probability that a uniform random
/// permutation of `n` points fixes a set of size `k`.
pub fn estimate_fixed_set(
    n: u64,
    k: u64,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<EstimatorResult> {
    if k < 1 || 2 * k > n {
        return Err(Error::KOutOfRange { n, k });
    }
    validate_samples(samples)?;
    let kk = k as usize;
    let hits = parallel_count(
        samples,
        workers,
        || SumSet::zero(kk),
        |stream, sums| {
            let mut rng = RngStream::new(seed, stream).rng();
            sums.clear();
            let mut rem = n;
            while rem > 0 {
                let len = rng.random_range(1..=rem);
                if len <= k {
                    sums.add_part(len as usize, 1);
                }
                rem -= len;
            }
            sums.contains(kk)
        },
    );
    Ok(indicator_result(hits, samples, seed))
}

/// Monte Carlo estimate of the limiting fixed-set probability under the
/// independent-Poisson cycle model.
pub fn estimate_limit(k: u64, samples: u64, seed: u64, workers: usize) -> Result<EstimatorResult> {
    if k < 1 {
        return Err(Error::invalid("k must be positive"));
    }
    validate_samples(samples)?;
    let kk = k as usize;
    let p0: Vec<f64> = (1..=k).map(|i| (-1.0 / i as f64).exp()).collect();
    let hits = parallel_count(
        samples,
        workers,
        || SumSet::zero(kk),
        |stream, sums| {
            let mut rng = RngStream::new(seed, stream).rng();
            sums.clear();
            for i in 1..=kk {
                let c = poisson_draw(1.0 / i as f64, p0[i - 1], &mut rng);
                if c > 0 {
                    sums.add_part(i, c);
                }
            }
            sums.contains(kk)
        },
    );
    Ok(indicator_result(hits, samples, seed))
}

/// Monte Carlo estimate of the expected subset-sum-set size of the Poisson
/// cycle counts: each sample builds the full (untruncated) sum set and
/// counts its members.
pub fn estimate_sumset_size(
    k: u64,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<EstimatorResult> {
    if k < 1 {
        return Err(Error::invalid("k must be positive"));
    }
    validate_samples(samples)?;
    let p0: Vec<f64> = (1..=k).map(|i| (-1.0 / i as f64).exp()).collect();
    let (total, total_sq) = parallel_totals(
        samples,
        workers,
        || (SumSet::zero(64), vec![0u64; k as usize]),
        |stream, (sums, counts)| {
            let mut rng = RngStream::new(seed, stream).rng();
            let mut weight = 0u64;
            for i in 1..=k {
                let c = poisson_draw(1.0 / i as f64, p0[i as usize - 1], &mut rng);
                counts[i as usize - 1] = c;
                weight += i * c;
            }
            sums.grow_cap(weight.max(1) as usize);
            sums.clear();
            for (idx, &c) in counts.iter().enumerate() {
                if c > 0 {
                    sums.add_part(idx + 1, c);
                }
            }
            sums.len() as u64
        },
    );
    Ok(mean_result(total, total_sq, samples, seed))
}
