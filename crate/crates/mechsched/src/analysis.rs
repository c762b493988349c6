//! Monte Carlo estimation of average-case approximation ratios, the
//! closed-form conditional social cost and its bracketing bounds,
//! convergence sweeps over the machine count, and bound comparisons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::CostVector;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::mechanisms::{allocate_k_by_rank, MechanismId};
use crate::rng::RandomStream;

/// One ratio-estimation experiment: draw `trials` cost matrices of
/// shape m×n (task j's row i.i.d. from `specs[j]`) and average the
/// ratio of total mechanism cost to total optimal cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub specs: Vec<DistributionSpec>,
    pub trials: usize,
    pub master_seed: u64,
    pub mechanism: MechanismId,
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::domain("need at least one machine"));
        }
        if self.specs.is_empty() {
            return Err(Error::domain("need at least one task distribution"));
        }
        if self.trials < 1 {
            return Err(Error::domain("need at least one trial"));
        }
        Ok(())
    }
}

/// Monte Carlo estimate of an average-case ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    /// The limiting constant Σ_j (E[1/t])^(−1) / Σ_j t_min.
    pub theoretical_limit: f64,
    pub seed: u64,
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub mean_k: f64,
    pub mean_p: f64,
    pub std_error_k: f64,
    pub std_error_p: f64,
    pub limit: f64,
}

/// Social cost of the selected mechanism on one task, given the costs
/// in ascending order. Mechanism P uses the harmonic identity
/// n / Σ 1/t; OPT is the minimum.
fn social_cost_sorted(mech: MechanismId, sorted: &[f64]) -> f64 {
    match mech {
        MechanismId::K => {
            let probs = allocate_k_by_rank(sorted);
            probs.iter().zip(sorted).map(|(p, t)| p * t).sum()
        }
        MechanismId::P => {
            sorted.len() as f64 / sorted.iter().map(|t| 1.0 / t).sum::<f64>()
        }
        MechanismId::Opt => sorted[0],
    }
}

/// Per-trial ratio of sums: Σ_j SC_mech(t^j) / Σ_j t^j_(1).
fn trial_ratio(config: &SimulationConfig, trial: usize) -> f64 {
    let m = config.specs.len() as u64;
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (j, spec) in config.specs.iter().enumerate() {
        let mut stream = RandomStream::new(config.master_seed, trial as u64 * m + j as u64);
        let mut costs: Vec<f64> = (0..config.n).map(|_| spec.sample(&mut stream)).collect();
        costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        numerator += social_cost_sorted(config.mechanism, &costs);
        denominator += costs[0];
    }
    numerator / denominator
}

/// Estimates the average-case approximation ratio. Trial k always uses
/// stream indices derived from (master seed, k), and the per-trial
/// ratios are reduced in trial order, so the result is bit-identical
/// for any worker count.
pub fn estimate_average_ratio(config: &SimulationConfig) -> Result<RatioEstimate> {
    config.validate()?;
    let ratios: Vec<f64> = (0..config.trials)
        .into_par_iter()
        .map(|trial| trial_ratio(config, trial))
        .collect();
    let mean = ratios.iter().sum::<f64>() / config.trials as f64;
    let std_error = if config.trials > 1 {
        let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / (config.trials - 1) as f64;
        (var / config.trials as f64).sqrt()
    } else {
        0.0
    };
    Ok(RatioEstimate {
        mean,
        std_error,
        trials: config.trials,
        theoretical_limit: theoretical_limit(&config.specs),
        seed: config.master_seed,
    })
}

/// The limiting constant both mechanisms converge to:
/// Σ_j (E_{t~F^j}[1/t])^(−1) / Σ_j t^j_min.
pub fn theoretical_limit(specs: &[DistributionSpec]) -> f64 {
    let numerator: f64 = specs.iter().map(|s| s.inverse_mean_reciprocal()).sum();
    let denominator: f64 = specs.iter().map(|s| s.t_min()).sum();
    numerator / denominator
}

/// Exact conditional expectation of mechanism K's social cost given
/// that the minimum cost is pinned to `s` and the other n − 1 costs
/// have conditional mean μ = E[s/t]:
/// (s/μ)·[1 − (1/n)·(1 − μ)(1 − (1 − μ)^n)/μ].
pub fn conditional_expected_sc_k(s: f64, mu: f64, n: usize) -> Result<f64> {
    check_sc_k_params(s, mu, n)?;
    let q = 1.0 - mu;
    Ok(s / mu * (1.0 - (q * (1.0 - q.powi(n as i32)) / mu) / n as f64))
}

/// The bracketing bounds around `conditional_expected_sc_k`:
/// lower (s/μ)(1 − 1/(nμ)), upper s/μ. The lower bound is vacuous
/// (negative) for small nμ.
pub fn lemma2_bounds(s: f64, mu: f64, n: usize) -> Result<(f64, f64)> {
    check_sc_k_params(s, mu, n)?;
    let upper = s / mu;
    let lower = upper * (1.0 - 1.0 / (n as f64 * mu));
    Ok((lower, upper))
}

fn check_sc_k_params(s: f64, mu: f64, n: usize) -> Result<()> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("s must be positive, got {s}")));
    }
    // mu = 1 is the degenerate limit where every cost equals s.
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::domain(format!("mu must lie in (0, 1], got {mu}")));
    }
    if n < 1 {
        return Err(Error::domain("n must be at least 1"));
    }
    Ok(())
}

/// Runs the ratio estimator for both mechanisms at each machine count.
/// Each n gets its own derived seed; K and P share it so they see the
/// same draws.
pub fn convergence_sweep(base: &SimulationConfig, n_values: &[usize]) -> Result<Vec<SweepRow>> {
    if n_values.is_empty() {
        return Err(Error::domain("n_values must be non-empty"));
    }
    let limit = theoretical_limit(&base.specs);
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        if n < 1 {
            return Err(Error::domain("n values must be positive"));
        }
        let seed = RandomStream::derive_seed(base.master_seed, n as u64);
        let mut config = SimulationConfig {
            n,
            specs: base.specs.clone(),
            trials: base.trials,
            master_seed: seed,
            mechanism: MechanismId::K,
        };
        let k = estimate_average_ratio(&config)?;
        config.mechanism = MechanismId::P;
        let p = estimate_average_ratio(&config)?;
        rows.push(SweepRow {
            n,
            mean_k: k.mean,
            mean_p: p.mean,
            std_error_k: k.std_error,
            std_error_p: p.std_error,
            limit,
        });
    }
    Ok(rows)
}

/// Comparison of the limiting constant against the earlier 2h + 1.33
/// bound, where h is the smallest multiple of t_min whose CDF reaches
/// 11/12.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub limit: f64,
    pub h: f64,
    pub prior_bound: f64,
    pub new_bound: f64,
}

pub fn improved_bound_check(spec: &DistributionSpec) -> BoundCheck {
    let t_min = spec.t_min();
    let target = 11.0 / 12.0;
    // bracket, then bisect to 1e-9 on the multiplier
    let mut hi = 2.0;
    while spec.cdf(hi * t_min) < target {
        hi *= 2.0;
    }
    let mut lo = 1.0;
    while hi - lo > 1e-9 {
        let mid = (lo + hi) / 2.0;
        if spec.cdf(mid * t_min) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let h = hi;
    let limit = spec.inverse_mean_reciprocal() / t_min;
    BoundCheck {
        limit,
        h,
        prior_bound: 2.0 * h + 1.33,
        new_bound: limit,
    }
}

/// Empirical supremum of SC_mech(t) / t_(1) over sampled inputs. The
/// probe set mixes log-uniform draws over six orders of magnitude with
/// a deterministic skewed family (1, M, ..., M) that approaches each
/// mechanism's worst case.
pub fn worst_case_probe(
    mech: MechanismId,
    n: usize,
    trials: usize,
    stream: &mut RandomStream,
) -> f64 {
    assert!(n >= 1 && trials >= 1);
    let skew_magnitudes = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6];
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let mut costs: Vec<f64> = if n >= 2 && trial < skew_magnitudes.len() {
            let mut v = vec![skew_magnitudes[trial]; n];
            v[0] = 1.0;
            v
        } else {
            (0..n)
                .map(|_| 10f64.powf(stream.next_f64() * 6.0 - 3.0))
                .collect()
        };
        costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ratio = social_cost_sorted(mech, &costs) / costs[0];
        worst = worst.max(ratio);
    }
    worst
}

/// Serializes sweep rows as CSV with at least 12 significant digits
/// (17 are printed, enough to round-trip every double exactly).
pub fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,mean_k,se_k,mean_p,se_p,limit\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            row.n, row.mean_k, row.std_error_k, row.mean_p, row.std_error_p, row.limit
        ));
    }
    out
}

pub fn sweep_rows_from_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("n,mean_k,se_k,mean_p,se_p,limit") => {}
        other => {
            return Err(Error::parse(format!(
                "unexpected sweep CSV header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::parse(format!(
                "sweep CSV row {}: expected 6 fields, got {}",
                i + 1,
                fields.len()
            )));
        }
        let parse = |f: &str| -> Result<f64> {
            f.parse()
                .map_err(|_| Error::parse(format!("sweep CSV row {}: bad number {f:?}", i + 1)))
        };
        rows.push(SweepRow {
            n: fields[0]
                .parse()
                .map_err(|_| Error::parse(format!("sweep CSV row {}: bad n", i + 1)))?,
            mean_k: parse(fields[1])?,
            std_error_k: parse(fields[2])?,
            mean_p: parse(fields[3])?,
            std_error_p: parse(fields[4])?,
            limit: parse(fields[5])?,
        });
    }
    Ok(rows)
}

/// Draws a cost vector with entries log-uniform over [1e−3, 1e3]; the
/// instance generator used by the randomized property and acceptance
/// probes.
pub fn log_uniform_costs(n: usize, stream: &mut RandomStream) -> CostVector {
    CostVector::new(
        (0..n)
            .map(|_| 10f64.powf(stream.next_f64() * 6.0 - 3.0))
            .collect(),
    )
    .unwrap()
}
