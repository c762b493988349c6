//! The two truthful mechanisms for allocating a task to unrelated
//! machines without money.
//!
//! Mechanism K allocates by the single-integral rule
//! p_(k) = (1/t_(k)) ∫_0^{t_(1)} ∏_{i≠k} (1 − x/t_(i)) dx and is the
//! optimal truthful mechanism (worst-case ratio (n+1)/2). Mechanism P
//! allocates with probability inversely proportional to the reported
//! cost (worst-case ratio n).

use serde::{Deserialize, Serialize};

use crate::core::{
    sort_costs, AllocationMatrix, AllocationVector, CostMatrix, CostVector, PROB_SUM_TOL,
};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre_01;

/// Which allocation rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismId {
    K,
    P,
    Opt,
}

impl MechanismId {
    pub fn as_str(&self) -> &'static str {
        match self {
            MechanismId::K => "k",
            MechanismId::P => "p",
            MechanismId::Opt => "opt",
        }
    }
}

impl std::str::FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Ok(MechanismId::K),
            "p" => Ok(MechanismId::P),
            "opt" => Ok(MechanismId::Opt),
            other => Err(Error::parse(format!(
                "unknown mechanism {other:?}; expected k, p, or opt"
            ))),
        }
    }
}

/// Mechanism K allocation probabilities, indexed by sorted rank.
///
/// Evaluates the normalized form p_(k) = (t_(1)/t_(k)) ∫_0^1
/// ∏_{i≠k} (1 − (t_(1)/t_(i)) x) dx with a Gauss–Legendre rule of
/// ⌈n/2⌉ nodes, which is exact because each integrand is a polynomial
/// of degree n − 1. The full product at each node is carried as
/// mantissa · 2^exponent so it cannot underflow for large n; the per-k
/// integrand is recovered by dividing out one factor.
pub(crate) fn allocate_k_by_rank(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    if n == 1 {
        return vec![1.0];
    }
    let t1 = sorted[0];
    let ratios: Vec<f64> = sorted.iter().map(|&ti| t1 / ti).collect();
    let rule = gauss_legendre_01(n.div_ceil(2));
    let mut acc = vec![0.0; n];
    let mut factors = vec![0.0; n];
    for &(x, w) in rule.iter() {
        let mut mantissa = 1.0f64;
        let mut exponent = 0i32;
        for (slot, &r) in factors.iter_mut().zip(&ratios) {
            let f = 1.0 - r * x; // in (0, 1]: r <= 1 and x < 1
            *slot = f;
            mantissa *= f;
            if mantissa < 1e-150 {
                mantissa *= 2f64.powi(500);
                exponent -= 500;
            }
        }
        // Underflows to 0 for extremely negative exponents, where the
        // node's contribution is far below double precision anyway.
        let scale = w * 2f64.powi(exponent);
        if scale > 0.0 {
            for (a, &f) in acc.iter_mut().zip(&factors) {
                *a += scale * (mantissa / f);
            }
        }
    }
    let mut probs: Vec<f64> = ratios.iter().zip(&acc).map(|(r, a)| r * a).collect();
    let sum: f64 = probs.iter().sum();
    assert!(
        (sum - 1.0).abs() <= PROB_SUM_TOL,
        "mechanism K quadrature lost the simplex: sum = {sum}"
    );
    for p in &mut probs {
        *p /= sum;
    }
    probs
}

/// Mechanism K allocation, indexed by original machine index.
pub fn allocate_k(costs: &CostVector) -> AllocationVector {
    let sorted = sort_costs(costs);
    let by_rank = allocate_k_by_rank(sorted.sorted().as_slice());
    AllocationVector::new(sorted.unsort_values(&by_rank))
        .expect("mechanism K produced an invalid allocation")
}

/// Maximum input size accepted by the coefficient-expansion oracle;
/// monomial expansion loses precision beyond this.
pub const K_REFERENCE_MAX_N: usize = 12;

/// Independent evaluation of mechanism K from the original
/// double-integral definition: p_1 = (1/t_1) ∫_0^{t_1} ∏_{i≥2}
/// (1 − y/t_i) dy and p_k = (1/(t_1 t_k)) ∫_0^{t_1} ∫_0^y
/// ∏_{i≥2, i≠k} (1 − x/t_i) dx dy, via explicit polynomial coefficient
/// expansion and term-by-term integration. Oracle path, capped at
/// n = 12.
pub fn allocate_k_reference(costs: &CostVector) -> Result<AllocationVector> {
    let n = costs.len();
    if n > K_REFERENCE_MAX_N {
        return Err(Error::domain(format!(
            "reference allocator is capped at n = {K_REFERENCE_MAX_N}, got n = {n}"
        )));
    }
    let sorted = sort_costs(costs);
    let t = sorted.sorted().as_slice();
    let t1 = t[0];
    let mut by_rank = vec![0.0; n];
    for k in 0..n {
        // coefficients of prod_{i >= 1 (0-based), i != k} (1 - x/t_i)
        let mut coeffs = vec![1.0f64];
        for (i, &ti) in t.iter().enumerate().skip(1) {
            if i == k {
                continue;
            }
            coeffs = poly_mul_linear(&coeffs, -1.0 / ti);
        }
        by_rank[k] = if k == 0 {
            // (1/t1) * sum_j c_j t1^{j+1} / (j+1)
            coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| c * t1.powi(j as i32) / (j as f64 + 1.0))
                .sum()
        } else {
            // (1/(t1 tk)) * sum_j c_j t1^{j+2} / ((j+1)(j+2))
            coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    c * t1.powi(j as i32 + 1) / (t[k] * (j as f64 + 1.0) * (j as f64 + 2.0))
                })
                .sum()
        };
    }
    AllocationVector::new(sorted.unsort_values(&by_rank))
}

/// Multiplies a coefficient vector by (1 + slope·x).
fn poly_mul_linear(coeffs: &[f64], slope: f64) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len() + 1];
    for (j, &c) in coeffs.iter().enumerate() {
        out[j] += c;
        out[j + 1] += c * slope;
    }
    out
}

/// Mechanism P: probability inversely proportional to cost.
pub fn allocate_p(costs: &CostVector) -> AllocationVector {
    let inv: Vec<f64> = costs.as_slice().iter().map(|&t| 1.0 / t).collect();
    let total: f64 = inv.iter().sum();
    AllocationVector::new(inv.iter().map(|&v| v / total).collect())
        .expect("mechanism P produced an invalid allocation")
}

/// Runs the selected single-task mechanism independently on every task.
pub fn allocate(mech: MechanismId, costs: &CostMatrix) -> Result<AllocationMatrix> {
    let rows = costs
        .tasks()
        .iter()
        .map(|task| match mech {
            MechanismId::K => allocate_k(task),
            MechanismId::P => allocate_p(task),
            MechanismId::Opt => crate::core::optimal_allocation(task),
        })
        .collect();
    AllocationMatrix::new(rows)
}

/// Expected cost of one machine under the binding-declaration rule:
/// allocation probabilities come from the reported costs, while the
/// per-task cost term is max(true, reported) for that machine.
/// `agent` is a 0-based machine index.
pub fn expected_agent_cost(
    mech: MechanismId,
    true_costs: &CostMatrix,
    reported_costs: &CostMatrix,
    agent: usize,
) -> Result<f64> {
    if true_costs.num_tasks() != reported_costs.num_tasks()
        || true_costs.num_machines() != reported_costs.num_machines()
    {
        return Err(Error::domain(
            "true and reported cost matrices must have the same shape".to_string(),
        ));
    }
    if agent >= true_costs.num_machines() {
        return Err(Error::domain(format!(
            "agent index {} out of range for {} machines",
            agent,
            true_costs.num_machines()
        )));
    }
    let alloc = allocate(mech, reported_costs)?;
    let mut cost = 0.0;
    for ((row, true_task), reported_task) in alloc
        .rows()
        .iter()
        .zip(true_costs.tasks())
        .zip(reported_costs.tasks())
    {
        let t = true_task.as_slice()[agent];
        let r = reported_task.as_slice()[agent];
        cost += row.as_slice()[agent] * t.max(r);
    }
    Ok(cost)
}

/// The threshold structure: mechanism K allocates at least as much as
/// P up to rank `l` and strictly less afterwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// 1-based rank; the largest rank where K's probability is still at
    /// least P's.
    pub l: usize,
    /// Mechanism K probabilities in sorted-rank order.
    pub probs_k: AllocationVector,
    /// Mechanism P probabilities in sorted-rank order.
    pub probs_p: AllocationVector,
}

pub fn threshold_index(costs: &CostVector) -> ThresholdReport {
    let sorted = sort_costs(costs);
    let k_by_rank = allocate_k_by_rank(sorted.sorted().as_slice());
    let inv: Vec<f64> = sorted.sorted().as_slice().iter().map(|&t| 1.0 / t).collect();
    let total: f64 = inv.iter().sum();
    let p_by_rank: Vec<f64> = inv.iter().map(|&v| v / total).collect();
    let l = k_by_rank
        .iter()
        .zip(&p_by_rank)
        .rposition(|(k, p)| k >= p)
        .expect("some rank must satisfy p_K >= p_P since both sum to one")
        + 1;
    ThresholdReport {
        l,
        probs_k: AllocationVector::new(k_by_rank).unwrap(),
        probs_p: AllocationVector::new(p_by_rank).unwrap(),
    }
}
