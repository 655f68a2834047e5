//! Independent reference computations used to verify the metric.
//!
//! Everything here favours directness over speed: exhaustive enumeration of
//! permutations and assignment sets, the four-atom transport problem for
//! Dirac Bernoulli pairs, and an exact network-simplex solve of the
//! transport problem between discretized Gaussian Bernoullis.

mod brute;
mod grid;
pub mod network_simplex;
mod transport;

pub use brute::{
    assignment_set_objective, brute_force_assignment_sets, brute_force_pgospa, AssignmentSetOptimum,
    ASSIGNMENT_SET_LIMIT, PERMUTATION_LIMIT,
};
pub use grid::{bernoulli_ot_grid, grid_slack, GridDensity, GridOtResult, MAX_GRID_ARCS, MIN_GRID_RESOLUTION};
pub use transport::{bernoulli_ot_dirac, bernoulli_ot_dirac_vertices, dirac_transport_plan, qospa_base, TransportPlan};
