//! Solvers for the bounded multiple traveling salesman problem: `k` tours
//! anchored at a shared depot must cover every city exactly once, each tour
//! visiting between `m_min` and `m_max` cities, minimizing total Euclidean
//! length.
//!
//! The main entry points are [`solver::solve`] (multi-restart heuristic),
//! [`oracle::solve_exact`] (exhaustive, micro instances only) and
//! [`ilp::build_model`] (exact integer programming formulation for external
//! solvers).

pub mod construction;
pub mod ilp;
pub mod improvement;
pub mod io;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod solver;

pub use model::{City, CityId, Instance, Solution, Tour};

/// Strict-improvement threshold: a move or edge exchange is applied only if
/// it lowers cost by more than this.
pub const GAIN_EPSILON: f64 = 1e-9;

/// Agreement tolerance between cached costs, predicted move gains and freshly
/// recomputed values.
pub const COST_TOLERANCE: f64 = 1e-6;
