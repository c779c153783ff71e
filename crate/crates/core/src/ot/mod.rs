//! Exact discrete optimal transport under squared-Euclidean cost.

mod brute;
mod cost;
mod monotone;
pub mod network_simplex;
mod plan;
mod rounding;
mod solve;

pub use brute::brute_force_ot;
pub use cost::{compensated_sum, cost_matrix, squared_distance, CostMatrix};
pub use monotone::{
    check_cyclical_monotone, check_monotone, CyclicReport, MonotoneReport, CYCLE_BUDGET,
    EXHAUSTIVE_MAX_POINTS, MONOTONE_TOL, SAMPLED_CYCLES,
};
pub use plan::{MapImages, RoundingMode, TransportMap, TransportPlan, MARGINAL_TOL};
pub use rounding::round_to_map;
pub use solve::{solve_ot, solve_ot_1d};
