//! Multi-restart driver: partition, construct, improve, keep the best.
//!
//! Restarts are independent and run in parallel; each derives its own RNG
//! seed from the master seed, so a run is reproducible for a fixed seed and
//! restart count no matter how the work is scheduled.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::construction::{self, ConstructionStrategy};
use crate::improvement::{relocate_a_vertex, relocate_subtours_until, swap_vertices};
use crate::model::{Instance, Solution};
use crate::partition::partition;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Master seed; each restart mixes its index into this.
    pub seed: u64,
    /// Independent restarts to run. The best result wins, ties go to the
    /// lowest restart index.
    pub restarts: usize,
    /// Wall-clock budget for the whole run. The first restart always runs
    /// (improvement may be cut short); later restarts are skipped once the
    /// budget is spent.
    pub time_limit: Option<Duration>,
    /// Name of the tour construction strategy, see [`construction::strategy`].
    pub construction: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 10,
            time_limit: None,
            construction: construction::CheapestInsertion.name().to_string(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("unknown construction strategy {name:?}")]
    UnknownStrategy { name: String },
    #[error("restarts must be at least 1")]
    NoRestarts,
}

/// Wall-clock seconds spent in each phase of one restart.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub partition: f64,
    pub construction: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone)]
pub struct RestartReport {
    pub index: usize,
    pub seed: u64,
    /// Total cost after construction, after segment relocation, and after
    /// every subsequent vertex-relocation + swap iteration. Non-increasing.
    pub trajectory: Vec<f64>,
    pub final_cost: f64,
    pub timings: PhaseTimings,
    /// True when the time limit cut improvement short.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub best: Solution,
    /// Index of the restart that produced [`RunReport::best`].
    pub best_restart: usize,
    /// Reports for the restarts that ran, in index order. Restarts skipped
    /// by the time limit are absent.
    pub restarts: Vec<RestartReport>,
    pub wall_seconds: f64,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for restart `r` of a run with the given master seed. Restart 0 does
/// not reuse the master seed directly, so changing only the restart count
/// never changes what any individual restart does.
pub fn restart_seed(master: u64, r: usize) -> u64 {
    mix64(master.wrapping_add((r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Percentage by which `cost_a` exceeds `cost_b` (negative when `cost_a` is
/// better). Rejects a non-positive baseline, which would flip the sign.
pub fn gap(cost_a: f64, cost_b: f64) -> Result<f64, GapError> {
    if !(cost_b > 0.0) {
        return Err(GapError { baseline: cost_b });
    }
    Ok((cost_a - cost_b) / cost_b * 100.0)
}

#[derive(Debug, thiserror::Error)]
#[error("gap baseline must be positive, got {baseline}")]
pub struct GapError {
    pub baseline: f64,
}

fn run_restart(
    inst: &Instance,
    strat: &dyn ConstructionStrategy,
    index: usize,
    seed: u64,
    deadline: Option<Instant>,
) -> (Solution, RestartReport) {
    let past = |d: Option<Instant>| d.is_some_and(|t| Instant::now() >= t);
    let mut timings = PhaseTimings::default();
    let mut trajectory = Vec::new();
    let mut truncated = false;

    let t = Instant::now();
    let part = partition(inst, seed);
    timings.partition = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut s = construction::construct_solution_with(&part, inst, strat);
    timings.construction = t.elapsed().as_secs_f64();
    trajectory.push(s.total_cost);

    let t = Instant::now();
    relocate_subtours_until(&mut s, inst, deadline);
    trajectory.push(s.total_cost);
    if past(deadline) {
        truncated = true;
    } else {
        loop {
            let g1 = relocate_a_vertex(&mut s, inst);
            let g2 = swap_vertices(&mut s, inst);
            trajectory.push(s.total_cost);
            if g1 == 0.0 && g2 == 0.0 {
                break;
            }
            if past(deadline) {
                truncated = true;
                break;
            }
        }
    }
    timings.improvement = t.elapsed().as_secs_f64();

    let report = RestartReport {
        index,
        seed,
        final_cost: s.total_cost,
        trajectory,
        timings,
        truncated,
    };
    (s, report)
}

pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<RunReport, SolverError> {
    if cfg.restarts == 0 {
        return Err(SolverError::NoRestarts);
    }
    let strat = construction::strategy(&cfg.construction).ok_or_else(|| {
        SolverError::UnknownStrategy {
            name: cfg.construction.clone(),
        }
    })?;
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|d| start + d);

    let mut results: Vec<(Solution, RestartReport)> = (0..cfg.restarts)
        .into_par_iter()
        .filter_map(|r| {
            // The first restart always runs so a solution always comes back.
            if r > 0 && deadline.is_some_and(|t| Instant::now() >= t) {
                return None;
            }
            Some(run_restart(inst, strat, r, restart_seed(cfg.seed, r), deadline))
        })
        .collect();
    results.sort_by_key(|(_, rep)| rep.index);

    let best_pos = results
        .iter()
        .enumerate()
        .min_by(|(_, (_, a)), (_, (_, b))| {
            a.final_cost
                .partial_cmp(&b.final_cost)
                .expect("tour costs are finite")
                .then(a.index.cmp(&b.index))
        })
        .map(|(pos, _)| pos)
        .expect("at least one restart ran");
    let best_restart = results[best_pos].1.index;
    let best = results[best_pos].0.clone();
    let restarts = results.into_iter().map(|(_, rep)| rep).collect();

    Ok(RunReport {
        best,
        best_restart,
        restarts,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, City, CityId};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, n: usize, k: usize) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cities = (0..=n)
            .map(|i| City {
                id: CityId(i as u32 + 1),
                x: rng.gen_range(0.0..100.0),
                y: rng.gen_range(0.0..100.0),
            })
            .collect();
        Instance::new("rnd", cities, k, 2, n.div_ceil(k) + 2).unwrap()
    }

    #[test]
    fn restart_seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..100).map(|r| restart_seed(42, r)).collect();
        let mut dedup = seeds.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), 100);
        assert_eq!(restart_seed(42, 7), seeds[7]);
        assert_ne!(restart_seed(42, 0), restart_seed(43, 0));
    }

    #[test]
    fn solve_is_deterministic_for_a_fixed_config() {
        let inst = random_instance(5, 24, 3);
        let cfg = SolverConfig {
            seed: 9,
            restarts: 4,
            ..SolverConfig::default()
        };
        let a = solve(&inst, &cfg).unwrap();
        let b = solve(&inst, &cfg).unwrap();
        assert_eq!(a.best.total_cost, b.best.total_cost);
        assert_eq!(a.best_restart, b.best_restart);
        assert_eq!(a.best.tours, b.best.tours);
        for (ra, rb) in a.restarts.iter().zip(&b.restarts) {
            assert_eq!(ra.trajectory, rb.trajectory);
            assert_eq!(ra.seed, rb.seed);
        }
    }

    #[test]
    fn trajectories_descend_and_solutions_validate() {
        for seed in 0..4u64 {
            let inst = random_instance(seed, 30, 3);
            let cfg = SolverConfig {
                seed,
                restarts: 3,
                ..SolverConfig::default()
            };
            let report = solve(&inst, &cfg).unwrap();
            assert!(validate(&report.best, &inst).is_clean());
            for rep in &report.restarts {
                for w in rep.trajectory.windows(2) {
                    assert!(w[1] <= w[0] + 1e-9, "trajectory rose: {:?}", rep.trajectory);
                }
                assert_eq!(*rep.trajectory.last().unwrap(), rep.final_cost);
                assert!(!rep.truncated);
            }
        }
    }

    #[test]
    fn more_restarts_never_hurt() {
        let inst = random_instance(11, 28, 3);
        let one = solve(
            &inst,
            &SolverConfig {
                seed: 4,
                restarts: 1,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        let ten = solve(
            &inst,
            &SolverConfig {
                seed: 4,
                restarts: 10,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        assert!(ten.best.total_cost <= one.best.total_cost + 1e-9);
    }

    #[test]
    fn zero_time_limit_still_yields_a_feasible_solution() {
        let inst = random_instance(2, 26, 3);
        let cfg = SolverConfig {
            seed: 1,
            restarts: 8,
            time_limit: Some(Duration::ZERO),
            ..SolverConfig::default()
        };
        let report = solve(&inst, &cfg).unwrap();
        assert!(validate(&report.best, &inst).is_clean());
        assert_eq!(report.restarts.len(), 1);
        assert!(report.restarts[0].truncated);
    }

    #[test]
    fn unknown_strategy_is_rejected() {
        let inst = random_instance(3, 12, 2);
        let cfg = SolverConfig {
            construction: "nearest-neighbor".into(),
            ..SolverConfig::default()
        };
        match solve(&inst, &cfg) {
            Err(SolverError::UnknownStrategy { name }) => assert_eq!(name, "nearest-neighbor"),
            other => panic!("expected strategy error, got {other:?}"),
        }
    }

    #[test]
    fn gap_sign_and_domain() {
        assert!((gap(102.0, 100.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((gap(98.0, 100.0).unwrap() + 2.0).abs() < 1e-12);
        assert!(gap(1.0, 0.0).is_err());
        assert!(gap(1.0, -5.0).is_err());
    }
}
