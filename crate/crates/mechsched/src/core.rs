//! Domain types shared by every mechanism: cost vectors and matrices,
//! order statistics, allocation vectors on the probability simplex, and
//! the social-cost / optimal-allocation primitives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entry tolerance for allocation probabilities: entries may stray this
/// far outside [0, 1] before we reject them.
pub const PROB_ENTRY_TOL: f64 = 1e-12;
/// Tolerance on the simplex constraint (entries summing to one).
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Strictly positive execution costs of the `n` machines for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::domain("cost vector must have at least one machine"));
        }
        for (i, &c) in costs.iter().enumerate() {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::domain(format!(
                    "cost for machine {} must be strictly positive and finite, got {}",
                    i + 1,
                    c
                )));
            }
        }
        Ok(CostVector(costs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty vectors
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Smallest cost in the vector.
    pub fn min(&self) -> f64 {
        self.0.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Execution costs of `n` machines for `m` tasks, one row per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    tasks: Vec<CostVector>,
}

impl CostMatrix {
    pub fn new(tasks: Vec<CostVector>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::domain("cost matrix must have at least one task"));
        }
        let n = tasks[0].len();
        for (j, row) in tasks.iter().enumerate() {
            if row.len() != n {
                return Err(Error::domain(format!(
                    "task {} has {} machines but task 1 has {}",
                    j + 1,
                    row.len(),
                    n
                )));
            }
        }
        Ok(CostMatrix { tasks })
    }

    /// Parses CSV text: one row per task, one column per machine, plain
    /// decimal literals. `skip_header` drops the first line.
    pub fn from_csv_str(text: &str, skip_header: bool) -> Result<Self> {
        let mut tasks = Vec::new();
        for (row_idx, line) in text
            .lines()
            .skip(if skip_header { 1 } else { 0 })
            .enumerate()
        {
            if line.trim().is_empty() {
                continue;
            }
            let mut costs = Vec::new();
            for (col_idx, field) in line.split(',').enumerate() {
                let value: f64 = field.trim().parse().map_err(|_| {
                    Error::parse(format!(
                        "row {}, column {}: cannot parse {:?} as a number",
                        row_idx + 1,
                        col_idx + 1,
                        field.trim()
                    ))
                })?;
                costs.push(value);
            }
            let row = CostVector::new(costs).map_err(|e| match e {
                Error::Domain(msg) => Error::domain(format!("row {}: {}", row_idx + 1, msg)),
                other => other,
            })?;
            tasks.push(row);
        }
        CostMatrix::new(tasks)
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_machines(&self) -> usize {
        self.tasks[0].len()
    }

    pub fn tasks(&self) -> &[CostVector] {
        &self.tasks
    }
}

/// A cost vector in ascending order together with the permutation that
/// maps each sorted rank back to the original machine index.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedCosts {
    sorted: CostVector,
    /// `permutation[rank]` is the original (0-based) machine index of the
    /// machine at sorted rank `rank`.
    permutation: Vec<usize>,
}

impl SortedCosts {
    pub fn sorted(&self) -> &CostVector {
        &self.sorted
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Reassembles the original vector from the sorted one.
    pub fn unsort(&self) -> CostVector {
        let mut original = vec![0.0; self.sorted.len()];
        for (rank, &machine) in self.permutation.iter().enumerate() {
            original[machine] = self.sorted.as_slice()[rank];
        }
        CostVector(original)
    }

    /// Scatters values given in sorted-rank order back to original
    /// machine order.
    pub fn unsort_values(&self, by_rank: &[f64]) -> Vec<f64> {
        let mut original = vec![0.0; by_rank.len()];
        for (rank, &machine) in self.permutation.iter().enumerate() {
            original[machine] = by_rank[rank];
        }
        original
    }
}

/// Stable ascending sort; ties keep original machine order.
pub fn sort_costs(costs: &CostVector) -> SortedCosts {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs.0[a].partial_cmp(&costs.0[b]).unwrap());
    let sorted = CostVector(order.iter().map(|&i| costs.0[i]).collect());
    SortedCosts {
        sorted,
        permutation: order,
    }
}

/// Allocation probabilities for one task, indexed by original machine
/// index. Entries lie in [0, 1] and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationVector(Vec<f64>);

impl AllocationVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("allocation vector must be non-empty"));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= -PROB_ENTRY_TOL && p <= 1.0 + PROB_ENTRY_TOL) {
                return Err(Error::domain(format!(
                    "allocation entry {} out of [0, 1]: {}",
                    i + 1,
                    p
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::domain(format!(
                "allocation entries sum to {} instead of 1",
                sum
            )));
        }
        Ok(AllocationVector(probs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-task allocation rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationMatrix {
    rows: Vec<AllocationVector>,
}

impl AllocationMatrix {
    pub fn new(rows: Vec<AllocationVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("allocation matrix must have at least one row"));
        }
        Ok(AllocationMatrix { rows })
    }

    pub fn rows(&self) -> &[AllocationVector] {
        &self.rows
    }
}

/// Expected execution cost of one task under an allocation: sum of
/// probability times cost over the machines.
pub fn social_cost(alloc: &AllocationVector, costs: &CostVector) -> Result<f64> {
    if alloc.len() != costs.len() {
        return Err(Error::domain(format!(
            "allocation has {} entries but costs has {}",
            alloc.len(),
            costs.len()
        )));
    }
    Ok(alloc
        .as_slice()
        .iter()
        .zip(costs.as_slice())
        .map(|(p, t)| p * t)
        .sum())
}

/// The cost-minimizing allocation: all mass on the lowest-indexed
/// machine attaining the minimum cost.
pub fn optimal_allocation(costs: &CostVector) -> AllocationVector {
    let min = costs.min();
    let winner = costs.as_slice().iter().position(|&c| c == min).unwrap();
    let mut probs = vec![0.0; costs.len()];
    probs[winner] = 1.0;
    AllocationVector(probs)
}

/// Total social cost across tasks: sum of per-task social costs.
pub fn total_social_cost(alloc: &AllocationMatrix, costs: &CostMatrix) -> Result<f64> {
    if alloc.rows().len() != costs.num_tasks() {
        return Err(Error::domain(format!(
            "allocation has {} rows but costs has {} tasks",
            alloc.rows().len(),
            costs.num_tasks()
        )));
    }
    let mut total = 0.0;
    for (row, task) in alloc.rows().iter().zip(costs.tasks()) {
        total += social_cost(row, task)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[f64]) -> CostVector {
        CostVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_costs() {
        assert!(CostVector::new(vec![]).is_err());
        assert!(CostVector::new(vec![1.0, 0.0]).is_err());
        assert!(CostVector::new(vec![-1.0]).is_err());
        assert!(CostVector::new(vec![f64::NAN]).is_err());
        assert!(CostVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn sort_basic() {
        let s = sort_costs(&cv(&[3.0, 1.0, 2.0]));
        assert_eq!(s.sorted().as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.permutation(), &[1, 2, 0]);
        assert_eq!(s.unsort(), cv(&[3.0, 1.0, 2.0]));
    }

    #[test]
    fn sort_singleton_and_ties() {
        let s = sort_costs(&cv(&[5.0]));
        assert_eq!(s.sorted().as_slice(), &[5.0]);
        assert_eq!(s.permutation(), &[0]);

        // Stable: equal costs keep machine order.
        let s = sort_costs(&cv(&[2.0, 2.0]));
        assert_eq!(s.sorted().as_slice(), &[2.0, 2.0]);
        assert_eq!(s.permutation(), &[0, 1]);
    }

    #[test]
    fn social_cost_examples() {
        let a = AllocationVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(social_cost(&a, &cv(&[1.0, 2.0])).unwrap(), 1.0);

        let a = AllocationVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(social_cost(&a, &cv(&[1.0, 3.0])).unwrap(), 2.0);

        // (23 + 16 + 15) / 36 = 1.5
        let a = AllocationVector::new(vec![23.0 / 36.0, 2.0 / 9.0, 5.0 / 36.0]).unwrap();
        let sc = social_cost(&a, &cv(&[1.0, 2.0, 3.0])).unwrap();
        assert!((sc - 1.5).abs() < 1e-15);
    }

    #[test]
    fn social_cost_shape_mismatch() {
        let a = AllocationVector::new(vec![1.0]).unwrap();
        assert!(social_cost(&a, &cv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn optimal_allocation_examples() {
        assert_eq!(
            optimal_allocation(&cv(&[3.0, 1.0, 2.0])).as_slice(),
            &[0.0, 1.0, 0.0]
        );
        // tie broken to lowest index
        assert_eq!(optimal_allocation(&cv(&[2.0, 2.0])).as_slice(), &[1.0, 0.0]);
        assert_eq!(optimal_allocation(&cv(&[7.0])).as_slice(), &[1.0]);
    }

    #[test]
    fn optimal_cost_is_min() {
        let c = cv(&[4.0, 2.5, 9.0, 2.5]);
        let a = optimal_allocation(&c);
        assert_eq!(social_cost(&a, &c).unwrap(), 2.5);
    }

    #[test]
    fn total_social_cost_additive() {
        let c = CostMatrix::new(vec![cv(&[1.0, 2.0]), cv(&[1.0, 2.0])]).unwrap();
        let a = AllocationMatrix::new(vec![
            AllocationVector::new(vec![1.0, 0.0]).unwrap(),
            AllocationVector::new(vec![1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(total_social_cost(&a, &c).unwrap(), 2.0);
    }

    #[test]
    fn csv_parse_ok() {
        let m = CostMatrix::from_csv_str("1,2,3\n4,5,6\n", false).unwrap();
        assert_eq!(m.num_tasks(), 2);
        assert_eq!(m.num_machines(), 3);
        assert_eq!(m.tasks()[1].as_slice(), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn csv_parse_reports_position() {
        let err = CostMatrix::from_csv_str("1,2\n3,x\n", false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("column 2"), "{msg}");
    }

    #[test]
    fn csv_header_flag() {
        let m = CostMatrix::from_csv_str("m1,m2\n1,2\n", true).unwrap();
        assert_eq!(m.num_tasks(), 1);
        assert!(CostMatrix::from_csv_str("m1,m2\n1,2\n", false).is_err());
    }

    #[test]
    fn csv_rejects_nonpositive_with_row() {
        let err = CostMatrix::from_csv_str("1,2\n0,1\n", false).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn allocation_vector_validation() {
        assert!(AllocationVector::new(vec![0.5, 0.6]).is_err());
        assert!(AllocationVector::new(vec![1.2, -0.2]).is_err());
        assert!(AllocationVector::new(vec![0.25, 0.75]).is_ok());
    }
}
