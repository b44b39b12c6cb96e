//! Implementations of the subcommands.

use std::path::Path;

use num_traits::ToPrimitive;
use serde_json::json;

use fixset::asymptotics::{
    self, fit_exponent, geometric_grid, half_partition_demo, normalize, scan as run_scan,
    simplex_min_integral_mc, upper_sum_term, ScanRow,
};
use fixset::exact::{verify_oracle_equivalence, ExactEngine, EXACT_MAX_N};
use fixset::poisson::{
    check_moment_bound, expected_sumset_size_brackets, limit_probability,
    limit_probability_extended, recommended_bracket_cap, LIMIT_DP_MAX_K,
};
use fixset::sampler::{estimate_fixed_set, estimate_limit, estimate_sumset_size};
use fixset::Report;

use crate::config::{Format, RunConfig};
use crate::output::{csv_metadata, json_envelope};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum LimitMethod {
    Dp,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Sieve,
    Sieve2,
    Cauchy,
    Oracle,
    Moments,
    Cyclelemma,
    Sumd,
    All,
}

pub struct VerifyBudgets {
    pub n_max: u64,
    pub law_n_max: u64,
    pub cauchy_n_max: u64,
    pub oracle_n_max: u64,
    pub samples: u64,
    pub instances: u64,
    pub level_max: usize,
}

fn emit(text: String) {
    print!("{text}");
}

pub fn exact(config: &RunConfig, n: u64, k: u64) -> Result<(), CliError> {
    if k < 1 || 2 * k > n {
        return Err(CliError::Usage(format!(
            "k must satisfy 1 <= k <= n/2 (got n={n}, k={k})"
        )));
    }
    if n > EXACT_MAX_N {
        return Err(CliError::Usage(format!(
            "n={n} exceeds the exact-evaluation envelope n <= {EXACT_MAX_N}; use `fixset estimate`"
        )));
    }
    let mut eng = ExactEngine::new();
    let p = eng.fixed_set_probability(n, k)?;
    let decimal = p.to_f64().unwrap_or(f64::NAN);
    match config.format {
        Format::Csv => {
            emit(csv_metadata(config));
            emit(format!(
                "n,k,numerator,denominator,decimal\n{n},{k},{},{},{decimal}\n",
                p.numer(),
                p.denom()
            ));
        }
        Format::Json => emit(json_envelope(
            config,
            "exact",
            json!({
                "n": n,
                "k": k,
                "numerator": p.numer().to_string(),
                "denominator": p.denom().to_string(),
                "decimal": decimal,
            }),
        )),
    }
    Ok(())
}

pub fn limit(
    config: &RunConfig,
    k: u64,
    method: LimitMethod,
    samples: u64,
) -> Result<(), CliError> {
    match method {
        LimitMethod::Dp => {
            if !(1..=LIMIT_DP_MAX_K).contains(&k) {
                return Err(CliError::Usage(format!(
                    "the exact DP covers 1 <= k <= {LIMIT_DP_MAX_K}; use --method mc beyond"
                )));
            }
            let value = if config.limit_dp_extended {
                limit_probability_extended(k)?.value
            } else {
                limit_probability(k)?
            };
            match config.format {
                Format::Csv => {
                    emit(csv_metadata(config));
                    emit(format!(
                        "k,method,estimate,stderr,samples\n{k},dp,{value},,\n"
                    ));
                }
                Format::Json => emit(json_envelope(
                    config,
                    "limit",
                    json!({"k": k, "method": "dp", "estimate": value}),
                )),
            }
        }
        LimitMethod::Mc => {
            let r = estimate_limit(k, samples, config.seed, config.workers)?;
            match config.format {
                Format::Csv => {
                    emit(csv_metadata(config));
                    emit(format!(
                        "k,method,estimate,stderr,samples\n{k},mc,{},{},{}\n",
                        r.estimate, r.stderr, r.samples
                    ));
                }
                Format::Json => emit(json_envelope(
                    config,
                    "limit",
                    json!({
                        "k": k,
                        "method": "mc",
                        "estimate": r.estimate,
                        "stderr": r.stderr,
                        "samples": r.samples,
                        "seed": r.seed,
                    }),
                )),
            }
        }
    }
    Ok(())
}

fn scan_rows_csv(config: &RunConfig, rows: &[ScanRow]) -> String {
    let mut out = csv_metadata(config);
    out.push_str("k,n,samples,estimate,stderr,normalized\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.k, r.n, r.samples, r.estimate, r.stderr, r.normalized
        ));
    }
    out
}

pub fn scan(
    config: &RunConfig,
    k_min: u64,
    k_max: u64,
    geometric: u64,
    n_ratio: u64,
    samples: u64,
) -> Result<(), CliError> {
    let grid = geometric_grid(k_min, k_max, geometric)?;
    let rows = run_scan(&grid, n_ratio, samples, config.seed, config.workers)?;
    match config.format {
        Format::Csv => emit(scan_rows_csv(config, &rows)),
        Format::Json => emit(json_envelope(
            config,
            "scan",
            json!({"rows": serde_json::to_value(&rows).expect("rows serialize")}),
        )),
    }
    Ok(())
}

/// Parse a scan CSV back into rows; `#` lines are metadata, the header
/// names the columns (`k` and `estimate` are required).
fn parse_scan_csv(text: &str) -> Result<Vec<ScanRow>, CliError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CliError::Usage("input has no header row".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| columns.iter().position(|&c| c == name);
    let k_idx = col("k").ok_or_else(|| CliError::Usage("missing column: k".into()))?;
    let est_idx = col("estimate").ok_or_else(|| CliError::Usage("missing column: estimate".into()))?;
    let n_idx = col("n");
    let samples_idx = col("samples");
    let stderr_idx = col("stderr");

    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |idx: Option<usize>| -> Result<f64, CliError> {
            match idx {
                Some(i) => fields
                    .get(i)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>())
                    .transpose()
                    .map_err(|e| CliError::Usage(format!("row {}: {e}", lineno + 1)))
                    .map(|v| v.unwrap_or(0.0)),
                None => Ok(0.0),
            }
        };
        let k = get(Some(k_idx))? as u64;
        let estimate = get(Some(est_idx))?;
        let row = ScanRow {
            k,
            n: get(n_idx)? as u64,
            samples: get(samples_idx)? as u64,
            estimate,
            stderr: get(stderr_idx)?,
            normalized: normalize(k.max(1), estimate.max(f64::MIN_POSITIVE)),
        };
        rows.push(row);
    }
    Ok(rows)
}

pub fn fit(config: &RunConfig, input: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", input.display())))?;
    let rows = parse_scan_csv(&text)?;
    let fit = fit_exponent(&rows)?;
    match config.format {
        Format::Csv => {
            emit(csv_metadata(config));
            emit(format!(
                "slope,stderr,n_points\n{},{},{}\n",
                fit.slope, fit.stderr, fit.n_points
            ));
        }
        Format::Json => emit(json_envelope(
            config,
            "fit",
            json!({"slope": fit.slope, "stderr": fit.stderr, "n_points": fit.n_points}),
        )),
    }
    Ok(())
}

pub fn el(
    config: &RunConfig,
    k: u64,
    samples: u64,
    exact: bool,
    cap: Option<usize>,
) -> Result<(), CliError> {
    if exact {
        let cap = cap.unwrap_or_else(|| recommended_bracket_cap(k.max(1)));
        let (lower, upper) = expected_sumset_size_brackets(k, cap)?;
        match config.format {
            Format::Csv => {
                emit(csv_metadata(config));
                emit(format!(
                    "k,lower,upper,gap\n{k},{lower},{upper},{}\n",
                    upper - lower
                ));
            }
            Format::Json => emit(json_envelope(
                config,
                "el",
                json!({"k": k, "lower": lower, "upper": upper, "gap": upper - lower}),
            )),
        }
        return Ok(());
    }
    let r = estimate_sumset_size(k, samples, config.seed, config.workers)?;
    let d = asymptotics::decay_exponent();
    let normalized = r.estimate * (k as f64).powf(d - 1.0) * (1.0 + (k as f64).ln()).powf(1.5);
    match config.format {
        Format::Csv => {
            emit(csv_metadata(config));
            emit(format!(
                "k,samples,estimate,stderr,normalized\n{k},{},{},{},{normalized}\n",
                r.samples, r.estimate, r.stderr
            ));
        }
        Format::Json => emit(json_envelope(
            config,
            "el",
            json!({
                "k": k,
                "samples": r.samples,
                "estimate": r.estimate,
                "stderr": r.stderr,
                "normalized": normalized,
                "seed": r.seed,
            }),
        )),
    }
    Ok(())
}

pub fn estimate(config: &RunConfig, n: u64, k: u64, samples: u64) -> Result<(), CliError> {
    let r = estimate_fixed_set(n, k, samples, config.seed, config.workers)?;
    match config.format {
        Format::Csv => {
            emit(csv_metadata(config));
            emit(format!(
                "n,k,samples,estimate,stderr\n{n},{k},{},{},{}\n",
                r.samples, r.estimate, r.stderr
            ));
        }
        Format::Json => emit(json_envelope(
            config,
            "estimate",
            json!({
                "n": n,
                "k": k,
                "samples": r.samples,
                "estimate": r.estimate,
                "stderr": r.stderr,
                "seed": r.seed,
            }),
        )),
    }
    Ok(())
}

fn print_report(name: &str, report: &Report) -> bool {
    for check in &report.checks {
        println!(
            "{} {} — {}",
            if check.pass { "ok  " } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    println!("suite {name}: {passed}/{} checks passed", report.len());
    report.all_pass()
}

pub fn verify(config: &RunConfig, suite: Suite, budgets: VerifyBudgets) -> Result<(), CliError> {
    let mut all_ok = true;
    let run_one = |which: Suite| -> Result<bool, CliError> {
        let (name, report): (&str, Report) = match which {
            Suite::Sieve => (
                "sieve",
                ExactEngine::new().verify_short_cycle_bounds(budgets.n_max),
            ),
            Suite::Sieve2 => {
                let mut eng = ExactEngine::new();
                let mut rep = Report::default();
                for n in 2..=budgets.law_n_max {
                    for m in 1..n {
                        rep.merge(eng.verify_cycle_count_bounds(n, m)?);
                    }
                }
                ("sieve2", rep)
            }
            Suite::Cauchy => (
                "cauchy",
                ExactEngine::new().verify_cauchy_partition(budgets.cauchy_n_max),
            ),
            Suite::Oracle => ("oracle", verify_oracle_equivalence(budgets.oracle_n_max)?),
            Suite::Moments => {
                let mut rep = Report::default();
                for k in [4u64, 16, 64] {
                    let mut js = vec![1u64, 2];
                    if !js.contains(&k) {
                        js.push(k);
                    }
                    rep.merge(check_moment_bound(k, &js, budgets.samples, config.seed)?);
                }
                ("moments", rep)
            }
            Suite::Cyclelemma => (
                "cyclelemma",
                asymptotics::verify_rotation_average(budgets.instances, 10, config.seed)?,
            ),
            Suite::Sumd => ("sumd", asymptotics::verify_dyadic_ratio(budgets.level_max)?),
            Suite::All => unreachable!("expanded by caller"),
        };
        Ok(print_report(name, &report))
    };
    match suite {
        Suite::All => {
            for which in [
                Suite::Sieve,
                Suite::Sieve2,
                Suite::Cauchy,
                Suite::Oracle,
                Suite::Moments,
                Suite::Cyclelemma,
                Suite::Sumd,
            ] {
                all_ok &= run_one(which)?;
            }
        }
        other => all_ok &= run_one(other)?,
    }
    if all_ok {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

pub fn transitive(config: &RunConfig, n: u64, samples: u64) -> Result<(), CliError> {
    let report = half_partition_demo(n, samples, config.seed, config.workers)?;
    if print_report("transitive", &report) {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

pub fn integrand(config: &RunConfig, r: u32, k: u64, samples: u64) -> Result<(), CliError> {
    let est = simplex_min_integral_mc(r, k, samples, config.seed)?;
    let term = upper_sum_term(r, k, est.estimate);
    match config.format {
        Format::Csv => {
            emit(csv_metadata(config));
            emit(format!(
                "r,k,samples,integral,stderr,term\n{r},{k},{},{},{},{term}\n",
                est.samples, est.estimate, est.stderr
            ));
        }
        Format::Json => emit(json_envelope(
            config,
            "integrand",
            json!({
                "r": r,
                "k": k,
                "samples": est.samples,
                "integral": est.estimate,
                "stderr": est.stderr,
                "term": term,
                "seed": est.seed,
            }),
        )),
    }
    Ok(())
}
