//! Truthful mechanisms for scheduling unrelated machines without money.
//!
//! The crate implements the two classic truthful allocation rules for
//! this setting, mechanism K (optimal, worst-case ratio (n+1)/2) and
//! mechanism P (inverse-proportional, worst-case ratio n), computes
//! their allocation probabilities exactly, and provides the machinery
//! to study them beyond the worst case: pointwise comparison
//! diagnostics, parametric cost distributions with conditional
//! sampling, closed-form conditional expectations, and reproducible
//! Monte Carlo estimation of average-case approximation ratios against
//! their limiting constants.

pub mod analysis;
pub mod cli;
pub mod core;
pub mod distributions;
pub mod error;
pub mod mechanisms;
pub mod quad;
pub mod rng;
pub mod special;

pub use crate::core::{
    optimal_allocation, social_cost, sort_costs, total_social_cost, AllocationMatrix,
    AllocationVector, CostMatrix, CostVector, SortedCosts,
};
pub use analysis::{
    convergence_sweep, estimate_average_ratio, improved_bound_check, theoretical_limit,
    worst_case_probe, RatioEstimate, SimulationConfig, SweepRow,
};
pub use distributions::DistributionSpec;
pub use error::{Error, Result};
pub use mechanisms::{
    allocate, allocate_k, allocate_k_reference, allocate_p, expected_agent_cost, threshold_index,
    MechanismId, ThresholdReport,
};
pub use rng::RandomStream;
pub use special::{exp_e1_scaled, exp_integral_e1};
