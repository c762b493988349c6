//! Command implementations behind the `mechsched` binary. Each command
//! returns a JSON envelope carrying the command name, every resolved
//! parameter (seeds included), and a machine-readable payload.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::analysis::{
    convergence_sweep, estimate_average_ratio, sweep_rows_to_csv, SimulationConfig,
};
use crate::core::{optimal_allocation, social_cost, CostMatrix, CostVector};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::mechanisms::{
    allocate, allocate_k, allocate_p, expected_agent_cost, threshold_index, MechanismId,
};
use crate::rng::RandomStream;

/// Default multiplicative deviation factors for the truthfulness probe.
pub const DEFAULT_DEVIATION_FACTORS: [f64; 6] = [0.5, 0.8, 0.9, 1.1, 1.25, 2.0];

/// Stable JSON output wrapper. serde_json maps are sorted by key, so
/// serialization is deterministic and round-trips byte-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEnvelope {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub results: Value,
    pub version: String,
}

impl OutputEnvelope {
    fn new(command: &str, parameters: Map<String, Value>, results: Value) -> Self {
        OutputEnvelope {
            command: command.to_string(),
            parameters,
            results,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serialization cannot fail")
    }
}

/// Parses inline cost syntax: `,` separates machines, `;` separates
/// tasks, e.g. "1,2,3;4,5,6".
pub fn parse_inline_costs(text: &str) -> Result<CostMatrix> {
    CostMatrix::from_csv_str(&text.replace(';', "\n"), false)
}

/// Parses `key=value` integer lists such as "n=20,trials=1000,seed=7".
/// `wanted` lists the accepted keys; missing keys fall back to
/// `defaults` entries, `None` means required.
pub fn parse_kv_integers(
    text: &str,
    wanted: &[(&str, Option<u64>)],
) -> Result<Vec<u64>> {
    let mut found: Vec<Option<u64>> = vec![None; wanted.len()];
    for part in text.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(format!("expected key=value, got {part:?}")))?;
        let idx = wanted
            .iter()
            .position(|(name, _)| *name == key.trim())
            .ok_or_else(|| Error::parse(format!("unknown key {key:?}")))?;
        if found[idx].is_some() {
            return Err(Error::parse(format!("duplicate key {key:?}")));
        }
        let parsed: u64 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("key {key:?} has non-integer value {value:?}")))?;
        found[idx] = Some(parsed);
    }
    wanted
        .iter()
        .zip(found)
        .map(|((name, default), value)| {
            value
                .or(*default)
                .ok_or_else(|| Error::parse(format!("missing required key {name:?}")))
        })
        .collect()
}

fn alloc_json(v: &crate::core::AllocationVector) -> Value {
    json!(v.as_slice())
}

/// Allocation probabilities plus per-task social cost and the optimal
/// cost t_(1) for each task.
pub fn cmd_allocate(mech: MechanismId, costs: &CostMatrix, source: &str) -> Result<OutputEnvelope> {
    let matrix = allocate(mech, costs)?;
    let mut rows = Vec::new();
    for (row, task) in matrix.rows().iter().zip(costs.tasks()) {
        rows.push(json!({
            "probs": row.as_slice(),
            "social_cost": social_cost(row, task)?,
            "opt_cost": task.min(),
        }));
    }
    let mut params = Map::new();
    params.insert("mechanism".into(), json!(mech.as_str()));
    params.insert("costs".into(), json!(source));
    Ok(OutputEnvelope::new(
        "allocate",
        params,
        json!({ "tasks": rows }),
    ))
}

/// Per-instance K-vs-P comparison: both social costs, the threshold
/// rank, and the dominance flag.
pub fn cmd_compare_instance(costs: &CostMatrix, source: &str) -> Result<OutputEnvelope> {
    let mut rows = Vec::new();
    for task in costs.tasks() {
        rows.push(compare_one(task)?);
    }
    let mut params = Map::new();
    params.insert("costs".into(), json!(source));
    Ok(OutputEnvelope::new(
        "compare",
        params,
        json!({ "tasks": rows }),
    ))
}

fn compare_one(task: &CostVector) -> Result<Value> {
    let sc_k = social_cost(&allocate_k(task), task)?;
    let sc_p = social_cost(&allocate_p(task), task)?;
    let report = threshold_index(task);
    Ok(json!({
        "sc_k": sc_k,
        "sc_p": sc_p,
        "sc_opt": task.min(),
        "threshold_l": report.l,
        "probs_k_by_rank": alloc_json(&report.probs_k),
        "probs_p_by_rank": alloc_json(&report.probs_p),
        "dominance": sc_k <= sc_p + 1e-9,
    }))
}

/// Randomized K-vs-P comparison over log-uniform instances; reports the
/// worst observed SC_K − SC_P, which dominance requires to stay within
/// numerical tolerance of zero.
pub fn cmd_compare_random(n: usize, trials: usize, seed: u64) -> Result<OutputEnvelope> {
    if n < 1 || trials < 1 {
        return Err(Error::domain("n and trials must be positive"));
    }
    let mut max_gap = f64::NEG_INFINITY;
    let mut dominance_all = true;
    for trial in 0..trials {
        let mut stream = RandomStream::new(seed, trial as u64);
        let costs = crate::analysis::log_uniform_costs(n, &mut stream);
        let sc_k = social_cost(&allocate_k(&costs), &costs)?;
        let sc_p = social_cost(&allocate_p(&costs), &costs)?;
        max_gap = max_gap.max(sc_k - sc_p);
        dominance_all &= sc_k <= sc_p + 1e-9;
    }
    let mut params = Map::new();
    params.insert("n".into(), json!(n));
    params.insert("trials".into(), json!(trials));
    params.insert("seed".into(), json!(seed));
    Ok(OutputEnvelope::new(
        "compare",
        params,
        json!({
            "max_sc_k_minus_sc_p": max_gap,
            "dominance": dominance_all,
        }),
    ))
}

/// Monte Carlo estimate of the average-case ratio, with the limiting
/// constant attached and a warning when the estimate strays more than
/// four standard errors from it.
pub fn cmd_ratio(
    mech: MechanismId,
    specs: Vec<DistributionSpec>,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<OutputEnvelope> {
    if mech == MechanismId::Opt {
        return Err(Error::domain(
            "ratio estimation targets mechanisms k or p".to_string(),
        ));
    }
    let config = SimulationConfig {
        n,
        specs: specs.clone(),
        trials,
        master_seed: seed,
        mechanism: mech,
    };
    let estimate = estimate_average_ratio(&config)?;
    let mut results = serde_json::to_value(&estimate).unwrap();
    let gap = (estimate.mean - estimate.theoretical_limit).abs();
    if gap > 4.0 * estimate.std_error {
        results.as_object_mut().unwrap().insert(
            "warning".into(),
            json!(format!(
                "estimate is {gap:.6} away from the limit, beyond 4 standard errors"
            )),
        );
    }
    let mut params = Map::new();
    params.insert("mechanism".into(), json!(mech.as_str()));
    params.insert(
        "dist".into(),
        json!(specs.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
    );
    params.insert("n".into(), json!(n));
    params.insert("trials".into(), json!(trials));
    params.insert("seed".into(), json!(seed));
    Ok(OutputEnvelope::new("ratio", params, results))
}

/// Convergence sweep over machine counts; writes the CSV and summarizes
/// the final row's gaps to the limit.
pub fn cmd_sweep(
    specs: Vec<DistributionSpec>,
    n_values: &[usize],
    trials: usize,
    seed: u64,
    out_path: &std::path::Path,
) -> Result<OutputEnvelope> {
    let base = SimulationConfig {
        n: 1,
        specs: specs.clone(),
        trials,
        master_seed: seed,
        mechanism: MechanismId::K,
    };
    let rows = convergence_sweep(&base, n_values)?;
    std::fs::write(out_path, sweep_rows_to_csv(&rows))?;
    let last = rows.last().unwrap();
    let mut params = Map::new();
    params.insert(
        "dist".into(),
        json!(specs.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
    );
    params.insert("n_list".into(), json!(n_values));
    params.insert("trials".into(), json!(trials));
    params.insert("seed".into(), json!(seed));
    params.insert("out".into(), json!(out_path.display().to_string()));
    Ok(OutputEnvelope::new(
        "sweep",
        params,
        json!({
            "limit": last.limit,
            "final_n": last.n,
            "final_gap_k": (last.mean_k - last.limit).abs(),
            "final_gap_p": (last.mean_p - last.limit).abs(),
            "final_gap_k_vs_p": (last.mean_k - last.mean_p).abs(),
            "rows_written": rows.len(),
        }),
    ))
}

/// Outcome of a truthfulness probe: the worst (most negative) expected
/// gain any sampled deviation achieved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthfulnessReport {
    pub min_gap: f64,
    pub pass: bool,
    pub probes: usize,
}

/// Probes truthfulness empirically: random true costs, one agent's
/// report scaled by each factor, expected cost compared against
/// truthful reporting under the binding max(true, reported) rule.
pub fn truthfulness_probe(
    mech: MechanismId,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
    factors: &[f64],
) -> Result<TruthfulnessReport> {
    if n < 1 || m < 1 || trials < 1 || factors.is_empty() {
        return Err(Error::domain(
            "truthfulness probe needs positive n, m, trials, and at least one factor".to_string(),
        ));
    }
    for &f in factors {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::domain(format!(
                "deviation factors must be positive, got {f}"
            )));
        }
    }
    let mut min_gap = f64::INFINITY;
    let mut probes = 0;
    for trial in 0..trials {
        let mut stream = RandomStream::new(seed, trial as u64);
        let tasks: Vec<CostVector> = (0..m)
            .map(|_| crate::analysis::log_uniform_costs(n, &mut stream))
            .collect();
        let truth = CostMatrix::new(tasks)?;
        for agent in 0..n {
            let truthful_cost = expected_agent_cost(mech, &truth, &truth, agent)?;
            for &factor in factors {
                let reported = scale_agent_reports(&truth, agent, factor)?;
                let deviated_cost = expected_agent_cost(mech, &truth, &reported, agent)?;
                min_gap = min_gap.min(deviated_cost - truthful_cost);
                probes += 1;
            }
        }
    }
    Ok(TruthfulnessReport {
        min_gap,
        pass: min_gap >= -1e-9,
        probes,
    })
}

/// Multiplies one machine's reported cost by `factor` across all tasks.
fn scale_agent_reports(costs: &CostMatrix, agent: usize, factor: f64) -> Result<CostMatrix> {
    let tasks = costs
        .tasks()
        .iter()
        .map(|task| {
            let mut row = task.as_slice().to_vec();
            row[agent] *= factor;
            CostVector::new(row)
        })
        .collect::<Result<Vec<_>>>()?;
    CostMatrix::new(tasks)
}

pub fn cmd_truthfulness(
    mech: MechanismId,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
    factors: &[f64],
) -> Result<OutputEnvelope> {
    let report = truthfulness_probe(mech, n, m, trials, seed, factors)?;
    let mut params = Map::new();
    params.insert("mechanism".into(), json!(mech.as_str()));
    params.insert("n".into(), json!(n));
    params.insert("m".into(), json!(m));
    params.insert("trials".into(), json!(trials));
    params.insert("seed".into(), json!(seed));
    params.insert("factors".into(), json!(factors));
    Ok(OutputEnvelope::new(
        "truthfulness",
        params,
        serde_json::to_value(&report).unwrap(),
    ))
}

/// OPT allocation helper for the CLI (keeps `allocate --mechanism opt`
/// symmetric with the truthful mechanisms).
pub fn opt_costs(costs: &CostMatrix) -> Vec<f64> {
    costs
        .tasks()
        .iter()
        .map(|t| social_cost(&optimal_allocation(t), t).unwrap())
        .collect()
}
