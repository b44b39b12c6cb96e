//! Monte Carlo cross-checks tying the samplers to the exact engines: the
//! small-n distributional test, the scaled-size monotonicity, the limit-DP
//! agreement, and the ordered-simplex upper chain.

use std::collections::HashMap;

use fixset::asymptotics::{simplex_min_integral_mc, upper_sum_term};
use fixset::cycle::{for_each_bounded_cycle_type, CycleType};
use fixset::exact::ExactEngine;
use fixset::poisson::{expected_sumset_size_brackets, limit_probability, recommended_bracket_cap};
use fixset::sampler::{
    estimate_limit, estimate_sumset_size, sample_cycle_lengths_at_most, RngStream,
};

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

mod gamma {
    //! Regularized upper incomplete gamma Q(a, x), for chi-square p-values.

    #[allow(clippy::excessive_precision)]
    fn ln_gamma(x: f64) -> f64 {
        // Lanczos, g = 7
        const COEF: [f64; 9] = [
            0.999_999_999_999_809_93,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_13,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + 7.5;
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }

    fn gamma_p_series(a: f64, x: f64) -> f64 {
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..500 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        sum * (-x + a * x.ln() - ln_gamma(a)).exp()
    }

    fn gamma_q_cf(a: f64, x: f64) -> f64 {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        (-x + a * x.ln() - ln_gamma(a)).exp() * h
    }

    /// Q(a, x) = P(Gamma(a) > x) / Gamma(a)
    pub fn gamma_q(a: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x < a + 1.0 {
            1.0 - gamma_p_series(a, x)
        } else {
            gamma_q_cf(a, x)
        }
    }

    #[test]
    fn known_values() {
        // chi-square with 2 dof: Q = exp(-x/2)
        for &x in &[0.5f64, 2.0, 10.0] {
            assert!((gamma_q(1.0, x / 2.0) - (-x / 2.0).exp()).abs() < 1e-12);
        }
    }
}

/// Sampled full cycle types of S_n match the exact law (chi-square GOF).
#[test]
fn stick_breaking_matches_exact_cycle_type_law() {
    for n in 2..=6u64 {
        // exact type probabilities
        let mut eng = ExactEngine::new();
        let nf: f64 = eng.factorial(n).to_string().parse().unwrap();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut probs: Vec<f64> = Vec::new();
        for_each_bounded_cycle_type(n as usize, n, |counts| {
            let w: u64 = counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (i as u64 + 1) * c)
                .sum();
            if w == n {
                let ways = eng
                    .cauchy_count(&CycleType::new(counts.to_vec()), n)
                    .unwrap();
                let ways: f64 = ways.to_string().parse().unwrap();
                index.insert(counts.to_vec(), probs.len());
                probs.push(ways / nf);
            }
        });

        let samples = 300_000u64;
        let mut observed = vec![0u64; probs.len()];
        for s in 0..samples {
            let mut rng = RngStream::new(1000 + n, s).rng();
            let lens = sample_cycle_lengths_at_most(n, n, &mut rng);
            let mut counts = CycleType::from_parts(&lens).counts().to_vec();
            counts.resize(n as usize, 0);
            let idx = index[&counts];
            observed[idx] += 1;
        }

        let mut chi2 = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            let expected = p * samples as f64;
            let diff = observed[i] as f64 - expected;
            chi2 += diff * diff / expected;
        }
        let dof = (probs.len() - 1) as f64;
        let p_value = gamma::gamma_q(dof / 2.0, chi2 / 2.0);
        assert!(
            p_value > 1e-4,
            "n={n}: chi2 = {chi2:.2} with {dof} dof, p = {p_value:.2e}"
        );
    }
}

/// The scaled expected size `E|sums| / k` is non-increasing in `k`.
#[test]
fn scaled_expected_size_non_increasing() {
    let w = workers();
    let mut prev: Option<(f64, f64)> = None;
    for ell in 1..=32u64 {
        let r = estimate_sumset_size(ell, 200_000, 77, w).unwrap();
        let scaled = r.estimate / ell as f64;
        let se = r.stderr / ell as f64;
        if let Some((prev_scaled, prev_se)) = prev {
            let slack = 4.0 * (se * se + prev_se * prev_se).sqrt();
            assert!(
                scaled <= prev_scaled + slack,
                "ell={ell}: {scaled} > {prev_scaled} + {slack}"
            );
        }
        prev = Some((scaled, se));
    }
}

/// Monte Carlo limit estimates agree with the exact DP through the DP
/// envelope, and the bracketed expectation contains the estimate.
#[test]
fn limit_estimator_agrees_with_dp() {
    let w = workers();
    for k in [3u64, 7, 12, 16, 20] {
        let dp = limit_probability(k).unwrap();
        let mc = estimate_limit(k, 400_000, 5, w).unwrap();
        assert!(
            (mc.estimate - dp).abs() <= 4.0 * mc.stderr,
            "k={k}: dp {dp} vs mc {} +- {}",
            mc.estimate,
            mc.stderr
        );
    }
}

#[test]
fn bracketed_expectation_contains_estimates() {
    let w = workers();
    for k in [4u64, 8] {
        let (lo, hi) = expected_sumset_size_brackets(k, recommended_bracket_cap(k)).unwrap();
        let mc = estimate_sumset_size(k, 400_000, 9, w).unwrap();
        assert!(
            mc.estimate - 4.0 * mc.stderr <= hi && lo <= mc.estimate + 4.0 * mc.stderr,
            "k={k}: [{lo}, {hi}] vs {} +- {}",
            mc.estimate,
            mc.stderr
        );
    }
}

/// Upper chain: `e * sum_r (2 h_k)^r r! U_r` dominates `k * E|sums|`.
/// The factor e comes from bounding the harmonic exponential by `e * k`.
#[test]
fn simplex_chain_dominates_expected_size() {
    let w = workers();
    let k = 64u64;
    let el = estimate_sumset_size(k, 300_000, 21, w).unwrap();

    let mut total = 0.0f64;
    let mut var_total = 0.0f64;
    for r in 0..=24u32 {
        let integral = simplex_min_integral_mc(r, k, 40_000, 500 + r as u64).unwrap();
        let term = upper_sum_term(r, k, integral.estimate);
        let term_se = upper_sum_term(r, k, integral.stderr);
        total += term;
        var_total += term_se * term_se;
    }
    let lhs = std::f64::consts::E * total;
    let rhs = k as f64 * el.estimate;
    let combined = (std::f64::consts::E * std::f64::consts::E * var_total
        + (k as f64 * el.stderr).powi(2))
    .sqrt();
    assert!(
        lhs >= rhs - 4.0 * combined,
        "chain fails: {lhs:.1} < {rhs:.1} - 4 * {combined:.1}"
    );
    // the margin should be structural, not borderline
    assert!(lhs > rhs, "expected a positive margin, got {lhs:.1} vs {rhs:.1}");
}
