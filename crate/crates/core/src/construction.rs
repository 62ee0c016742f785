//! Phase 2: build one depot-anchored tour per subset.
//!
//! The tour builder is a cheapest-insertion heuristic behind a small
//! strategy interface, so an alternative constructor can be swapped in
//! without touching the solver.

use crate::model::{CityId, Instance, Solution, Tour};
use crate::partition::Partition;
use crate::GAIN_EPSILON;

/// A deterministic tour constructor over one subset of cities.
pub trait ConstructionStrategy: Sync {
    fn name(&self) -> &'static str;
    /// Builds a depot-anchored tour visiting exactly the given vertices.
    /// `vertices` must be non-empty and depot-free.
    fn construct(&self, vertices: &[CityId], inst: &Instance) -> Tour;
}

/// Cheapest insertion: start from the 2-cycle (depot, farthest vertex), then
/// repeatedly insert the vertex whose cheapest position costs least.
pub struct CheapestInsertion;

/// Looks up a construction strategy by name. Currently only
/// `cheapest-insertion` ships.
pub fn strategy(name: &str) -> Option<&'static dyn ConstructionStrategy> {
    match name {
        "cheapest-insertion" => Some(&CheapestInsertion),
        _ => None,
    }
}

impl ConstructionStrategy for CheapestInsertion {
    fn name(&self) -> &'static str {
        "cheapest-insertion"
    }

    fn construct(&self, vertices: &[CityId], inst: &Instance) -> Tour {
        assert!(!vertices.is_empty(), "construct: empty vertex set");
        let depot = inst.depot();
        let mut pool: Vec<CityId> = vertices.to_vec();
        pool.sort();

        // Farthest vertex from the depot seeds the tour; strict > on an
        // ascending scan keeps the lowest id among ties.
        let mut far = pool[0];
        let mut far_d = inst.distance(depot, far);
        for &v in &pool[1..] {
            let d = inst.distance(depot, v);
            if d > far_d {
                far = v;
                far_d = d;
            }
        }
        let mut tour: Vec<CityId> = vec![far];
        pool.retain(|&v| v != far);
        if pool.is_empty() {
            return Tour::new(tour);
        }

        // Cached best insertion (cost, gap) per pending vertex, kept as the
        // lexicographic minimum so equal costs resolve to the lowest gap.
        // Gap g means insertion between cycle neighbors (node g, node g+1),
        // where node 0 and node len+1 are the depot.
        let node = |tour: &[CityId], i: usize| -> CityId {
            if i == 0 || i == tour.len() + 1 {
                depot
            } else {
                tour[i - 1]
            }
        };
        let gap_cost = |tour: &[CityId], g: usize, v: CityId| -> f64 {
            let a = node(tour, g);
            let b = node(tour, g + 1);
            inst.distance(a, v) + inst.distance(v, b) - inst.distance(a, b)
        };
        let full_scan = |tour: &[CityId], v: CityId| -> (f64, usize) {
            let mut best = (gap_cost(tour, 0, v), 0);
            for g in 1..=tour.len() {
                let c = gap_cost(tour, g, v);
                if c < best.0 {
                    best = (c, g);
                }
            }
            best
        };

        let mut cache: Vec<(f64, usize)> = pool.iter().map(|&v| full_scan(&tour, v)).collect();
        while !pool.is_empty() {
            let mut pick = 0;
            for i in 1..pool.len() {
                if cache[i].0 < cache[pick].0 {
                    pick = i;
                }
            }
            let v = pool.remove(pick);
            let (_, g) = cache.remove(pick);
            tour.insert(g, v);

            // Gap g was split into gaps g and g+1; later gaps shift by one.
            for (i, &u) in pool.iter().enumerate() {
                let (c, bg) = cache[i];
                if bg == g {
                    cache[i] = full_scan(&tour, u);
                    continue;
                }
                let shifted = if bg > g { bg + 1 } else { bg };
                let mut best = (c, shifted);
                for ng in [g, g + 1] {
                    let nc = gap_cost(&tour, ng, u);
                    if nc < best.0 || (nc == best.0 && ng < best.1) {
                        best = (nc, ng);
                    }
                }
                cache[i] = best;
            }
        }
        Tour::new(tour)
    }
}

/// Builds the tour for one subset with the default strategy.
pub fn construct_tour(vertices: &[CityId], inst: &Instance) -> Tour {
    CheapestInsertion.construct(vertices, inst)
}

/// Improves a tour with 2-opt edge exchanges over the closed cycle,
/// including both depot edges. Best improvement per pass; passes repeat
/// until no exchange gains more than the strict-improvement threshold.
pub fn two_opt(tour: &mut Tour, inst: &Instance) {
    let depot = inst.depot();
    let m = tour.len();
    if m < 2 {
        return;
    }
    // Cycle node i for i in 0..=m+1; edge e joins nodes e and e+1.
    loop {
        let node = |i: usize| -> CityId {
            if i == 0 || i == m + 1 {
                depot
            } else {
                tour.cities[i - 1]
            }
        };
        let mut best_delta = 0.0;
        let mut best: Option<(usize, usize)> = None;
        for e1 in 0..m {
            let (a, b) = (node(e1), node(e1 + 1));
            let w_ab = inst.distance(a, b);
            for e2 in e1 + 1..=m {
                let (c, d) = (node(e2), node(e2 + 1));
                let delta =
                    inst.distance(a, c) + inst.distance(b, d) - w_ab - inst.distance(c, d);
                if delta < best_delta {
                    best_delta = delta;
                    best = Some((e1, e2));
                }
            }
        }
        match best {
            Some((e1, e2)) if best_delta < -GAIN_EPSILON => {
                // Reconnect a->c and b->d by reversing the segment between.
                tour.cities[e1..e2].reverse();
            }
            _ => return,
        }
    }
}

/// Builds the initial solution: one constructed tour per subset, in subset
/// order. No local search happens here.
pub fn construct_solution(p: &Partition, inst: &Instance) -> Solution {
    construct_solution_with(p, inst, &CheapestInsertion)
}

pub fn construct_solution_with(
    p: &Partition,
    inst: &Instance,
    strat: &dyn ConstructionStrategy,
) -> Solution {
    let tours: Vec<Tour> = p
        .subsets
        .iter()
        .map(|s| strat.construct(s, inst))
        .collect();
    Solution::evaluated(tours, inst).expect("partition ids come from the instance")
}
