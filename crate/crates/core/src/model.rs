//! Problem data: cities, instances, tours and solutions, plus cost
//! evaluation and structural validation.

use std::collections::HashMap;
use std::fmt;

use crate::COST_TOLERANCE;

/// 1-based city identifier matching TSPLIB node numbering. Id 1 is the depot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CityId(pub u32);

impl fmt::Display for CityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A city with planar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct City {
    pub id: CityId,
    pub x: f64,
    pub y: f64,
}

/// Exact Euclidean distance between two cities.
pub fn distance(a: &City, b: &City) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// How edge weights are derived from coordinates.
///
/// `Exact` is the default everywhere; `RoundedTsplib` reproduces the TSPLIB
/// EUC_2D convention (distances rounded to the nearest integer) for
/// comparisons against literature that uses it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    #[default]
    Exact,
    RoundedTsplib,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("instance has no cities")]
    Empty,
    #[error("duplicate city id {0}")]
    DuplicateCity(CityId),
    #[error("city ids must cover 1..={expected} without gaps; id {missing} is missing")]
    IdGap { expected: usize, missing: u32 },
    #[error("non-finite coordinate on city {0}")]
    NonFiniteCoordinate(CityId),
    #[error("tour size bounds invalid: m_min={m_min}, m_max={m_max} (need 1 <= m_min <= m_max)")]
    BadBounds { m_min: usize, m_max: usize },
    #[error("salesman count must be at least 1")]
    NoSalesmen,
    #[error(
        "infeasible instance: need k*m_min <= n <= k*m_max, got {k}*{m_min} = {lo} and {k}*{m_max} = {hi} around n = {n}",
        lo = .k * .m_min,
        hi = .k * .m_max
    )]
    Infeasible {
        n: usize,
        k: usize,
        m_min: usize,
        m_max: usize,
    },
    #[error("unknown city id {0}")]
    UnknownCity(CityId),
    #[error("distance matrix cache supports at most {limit} non-depot cities, instance has {n}")]
    MatrixTooLarge { n: usize, limit: usize },
}

/// Largest `n` for which a full distance matrix may be cached.
pub const MATRIX_LIMIT: usize = 2000;

/// A validated problem instance.
///
/// Invariants held by construction: city ids are exactly `1..=cities.len()`
/// with the depot at id 1, coordinates are finite, `1 <= m_min <= m_max`,
/// `k >= 1` and `k*m_min <= n <= k*m_max` where `n` is the non-depot count.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    cities: Vec<City>,
    k: usize,
    m_min: usize,
    m_max: usize,
    metric: DistanceMetric,
    matrix: Option<Box<[f64]>>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        mut cities: Vec<City>,
        k: usize,
        m_min: usize,
        m_max: usize,
    ) -> Result<Self, ModelError> {
        if cities.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut seen: HashMap<u32, ()> = HashMap::with_capacity(cities.len());
        for c in &cities {
            if !c.x.is_finite() || !c.y.is_finite() {
                return Err(ModelError::NonFiniteCoordinate(c.id));
            }
            if seen.insert(c.id.0, ()).is_some() {
                return Err(ModelError::DuplicateCity(c.id));
            }
        }
        for id in 1..=cities.len() as u32 {
            if !seen.contains_key(&id) {
                return Err(ModelError::IdGap {
                    expected: cities.len(),
                    missing: id,
                });
            }
        }
        cities.sort_by_key(|c| c.id);
        if m_min < 1 || m_min > m_max {
            return Err(ModelError::BadBounds { m_min, m_max });
        }
        if k < 1 {
            return Err(ModelError::NoSalesmen);
        }
        let n = cities.len() - 1;
        if k * m_min > n || n > k * m_max {
            return Err(ModelError::Infeasible { n, k, m_min, m_max });
        }
        Ok(Instance {
            name: name.into(),
            cities,
            k,
            m_min,
            m_max,
            metric: DistanceMetric::Exact,
            matrix: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// All cities sorted by id; index `i` holds id `i+1`.
    pub fn cities(&self) -> &[City] {
        &self.cities
    }

    /// Non-depot city count.
    pub fn n(&self) -> usize {
        self.cities.len() - 1
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m_min(&self) -> usize {
        self.m_min
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn depot(&self) -> CityId {
        CityId(1)
    }

    /// Ids of all non-depot cities in ascending order.
    pub fn non_depot_ids(&self) -> Vec<CityId> {
        self.cities[1..].iter().map(|c| c.id).collect()
    }

    pub fn contains(&self, id: CityId) -> bool {
        id.0 >= 1 && (id.0 as usize) <= self.cities.len()
    }

    pub fn city(&self, id: CityId) -> Option<&City> {
        if self.contains(id) {
            Some(&self.cities[id.0 as usize - 1])
        } else {
            None
        }
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    /// Switches the edge-weight convention. Drops any cached matrix, which
    /// was built for the previous metric.
    pub fn set_metric(&mut self, metric: DistanceMetric) {
        if self.metric != metric {
            self.metric = metric;
            self.matrix = None;
        }
    }

    /// Precomputes all pairwise distances. Refused above [`MATRIX_LIMIT`]
    /// non-depot cities; everything keeps working without the cache.
    pub fn cache_distance_matrix(&mut self) -> Result<(), ModelError> {
        if self.n() > MATRIX_LIMIT {
            return Err(ModelError::MatrixTooLarge {
                n: self.n(),
                limit: MATRIX_LIMIT,
            });
        }
        let dim = self.cities.len();
        let mut m = vec![0.0; dim * dim].into_boxed_slice();
        for i in 0..dim {
            for j in 0..dim {
                m[i * dim + j] = self.compute_distance(&self.cities[i], &self.cities[j]);
            }
        }
        self.matrix = Some(m);
        Ok(())
    }

    fn compute_distance(&self, a: &City, b: &City) -> f64 {
        let d = distance(a, b);
        match self.metric {
            DistanceMetric::Exact => d,
            DistanceMetric::RoundedTsplib => d.round(),
        }
    }

    /// Edge weight between two cities under the instance metric.
    ///
    /// Panics on ids outside `1..=n+1`; callers holding unvalidated ids go
    /// through [`tour_cost`] instead.
    pub fn distance(&self, a: CityId, b: CityId) -> f64 {
        let (i, j) = (a.0 as usize - 1, b.0 as usize - 1);
        if let Some(m) = &self.matrix {
            return m[i * self.cities.len() + j];
        }
        self.compute_distance(&self.cities[i], &self.cities[j])
    }
}

/// One depot-anchored tour. Only non-depot city ids are stored; the depot is
/// implicit at both ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub cities: Vec<CityId>,
}

impl Tour {
    pub fn new(cities: Vec<CityId>) -> Self {
        Tour { cities }
    }

    pub fn len(&self) -> usize {
        self.cities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cities.is_empty()
    }
}

/// Closed-cycle cost of a tour: depot -> cities in order -> depot.
///
/// An empty tour costs 0. Ids outside the instance produce an error.
pub fn tour_cost(tour: &Tour, inst: &Instance) -> Result<f64, ModelError> {
    for &c in &tour.cities {
        if !inst.contains(c) {
            return Err(ModelError::UnknownCity(c));
        }
    }
    Ok(tour_cost_unchecked(tour, inst))
}

/// Same as [`tour_cost`] for pre-validated tours; summation runs
/// left-to-right for deterministic rounding.
pub(crate) fn tour_cost_unchecked(tour: &Tour, inst: &Instance) -> f64 {
    if tour.cities.is_empty() {
        return 0.0;
    }
    let d = inst.depot();
    let mut cost = inst.distance(d, tour.cities[0]);
    for w in tour.cities.windows(2) {
        cost += inst.distance(w[0], w[1]);
    }
    cost + inst.distance(*tour.cities.last().unwrap(), d)
}

/// Sum of tour costs in tour order.
pub fn solution_cost(tours: &[Tour], inst: &Instance) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for t in tours {
        total += tour_cost(t, inst)?;
    }
    Ok(total)
}

/// A candidate solution with cached costs.
///
/// The caches are bookkeeping, not truth: [`validate`] recomputes costs from
/// coordinates and flags any drift beyond [`COST_TOLERANCE`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub tours: Vec<Tour>,
    tour_costs: Vec<f64>,
    pub total_cost: f64,
}

impl Solution {
    /// Builds a solution and evaluates its cost caches from the instance.
    pub fn evaluated(tours: Vec<Tour>, inst: &Instance) -> Result<Self, ModelError> {
        let mut tour_costs = Vec::with_capacity(tours.len());
        for t in &tours {
            tour_costs.push(tour_cost(t, inst)?);
        }
        let total_cost = tour_costs.iter().sum();
        Ok(Solution {
            tours,
            tour_costs,
            total_cost,
        })
    }

    /// Builds a solution carrying externally supplied cost caches, e.g. read
    /// back from a solution file. No validation happens here.
    pub fn with_cached_costs(tours: Vec<Tour>, tour_costs: Vec<f64>, total_cost: f64) -> Self {
        Solution {
            tours,
            tour_costs,
            total_cost,
        }
    }

    pub fn cached_tour_costs(&self) -> &[f64] {
        &self.tour_costs
    }

    /// Re-evaluates one tour's cached cost after mutation and refreshes the
    /// total as a plain sum of the per-tour caches, so repeated moves cannot
    /// accumulate incremental drift.
    pub(crate) fn recompute_tour(&mut self, idx: usize, inst: &Instance) {
        self.tour_costs[idx] = tour_cost_unchecked(&self.tours[idx], inst);
        self.total_cost = self.tour_costs.iter().sum();
    }
}

/// One structural defect found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    WrongTourCount { expected: usize, actual: usize },
    SizeBound { tour: usize, len: usize },
    DepotInTour { tour: usize },
    UnknownCity { tour: usize, city: CityId },
    DuplicateCity { city: CityId, count: usize },
    MissingCity { city: CityId },
    TourCostMismatch { tour: usize, cached: f64, computed: f64 },
    TotalCostMismatch { cached: f64, computed: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongTourCount { expected, actual } => {
                write!(f, "expected {expected} tours, found {actual}")
            }
            Violation::SizeBound { tour, len } => {
                write!(f, "tour {tour} has {len} cities, outside the size bounds")
            }
            Violation::DepotInTour { tour } => write!(f, "tour {tour} contains the depot"),
            Violation::UnknownCity { tour, city } => {
                write!(f, "tour {tour} references unknown city {city}")
            }
            Violation::DuplicateCity { city, count } => {
                write!(f, "city {city} appears {count} times")
            }
            Violation::MissingCity { city } => write!(f, "city {city} is not visited"),
            Violation::TourCostMismatch {
                tour,
                cached,
                computed,
            } => write!(
                f,
                "tour {tour} cached cost {cached} differs from recomputed {computed}"
            ),
            Violation::TotalCostMismatch { cached, computed } => write!(
                f,
                "total cached cost {cached} differs from recomputed {computed}"
            ),
        }
    }
}

/// Outcome of [`validate`]: empty exactly when the solution is feasible and
/// its caches are trustworthy.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_clean() {
            return write!(f, "valid");
        }
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks a solution against every instance invariant. Violations are
/// reported as data; nothing here is an error.
pub fn validate(s: &Solution, inst: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    if s.tours.len() != inst.k() {
        report.violations.push(Violation::WrongTourCount {
            expected: inst.k(),
            actual: s.tours.len(),
        });
    }

    let mut any_unknown = false;
    let mut counts: HashMap<CityId, usize> = HashMap::new();
    for (ti, tour) in s.tours.iter().enumerate() {
        if tour.len() < inst.m_min() || tour.len() > inst.m_max() {
            report.violations.push(Violation::SizeBound {
                tour: ti,
                len: tour.len(),
            });
        }
        let mut depot_flagged = false;
        for &c in &tour.cities {
            if c == inst.depot() {
                if !depot_flagged {
                    report.violations.push(Violation::DepotInTour { tour: ti });
                    depot_flagged = true;
                }
            } else if !inst.contains(c) {
                any_unknown = true;
                report
                    .violations
                    .push(Violation::UnknownCity { tour: ti, city: c });
            } else {
                *counts.entry(c).or_insert(0) += 1;
            }
        }
    }
    let mut dups: Vec<(CityId, usize)> = counts
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(&c, &n)| (c, n))
        .collect();
    dups.sort();
    for (city, count) in dups {
        report
            .violations
            .push(Violation::DuplicateCity { city, count });
    }
    for c in inst.non_depot_ids() {
        if !counts.contains_key(&c) {
            report.violations.push(Violation::MissingCity { city: c });
        }
    }

    // Cost caches only make sense once every referenced id resolves.
    if !any_unknown {
        let mut total = 0.0;
        for (ti, tour) in s.tours.iter().enumerate() {
            let computed = tour_cost_unchecked(tour, inst);
            total += computed;
            if let Some(&cached) = s.tour_costs.get(ti) {
                // Written as a negated <= so NaN caches are flagged too.
                if !((cached - computed).abs() <= COST_TOLERANCE) {
                    report.violations.push(Violation::TourCostMismatch {
                        tour: ti,
                        cached,
                        computed,
                    });
                }
            }
        }
        if !((s.total_cost - total).abs() <= COST_TOLERANCE) {
            report.violations.push(Violation::TotalCostMismatch {
                cached: s.total_cost,
                computed: total,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn city(id: u32, x: f64, y: f64) -> City {
        City {
            id: CityId(id),
            x,
            y,
        }
    }

    /// Depot at the origin plus a unit square corner walk.
    fn square() -> Instance {
        Instance::new(
            "square",
            vec![
                city(1, 0.0, 0.0),
                city(2, 1.0, 0.0),
                city(3, 1.0, 1.0),
                city(4, 0.0, 1.0),
            ],
            1,
            1,
            3,
        )
        .unwrap()
    }

    #[test]
    fn euclidean_345() {
        let a = city(1, 0.0, 0.0);
        let b = city(2, 3.0, 4.0);
        assert_eq!(distance(&a, &b), 5.0);
        assert_eq!(distance(&b, &a), 5.0);
    }

    #[test]
    fn unit_square_tour_costs_four() {
        let inst = square();
        let t = Tour::new(vec![CityId(2), CityId(3), CityId(4)]);
        assert_eq!(tour_cost(&t, &inst).unwrap(), 4.0);
    }

    #[test]
    fn empty_tour_costs_zero() {
        let inst = square();
        assert_eq!(tour_cost(&Tour::new(vec![]), &inst).unwrap(), 0.0);
    }

    #[test]
    fn unknown_city_is_an_error() {
        let inst = square();
        let t = Tour::new(vec![CityId(9)]);
        assert!(matches!(
            tour_cost(&t, &inst),
            Err(ModelError::UnknownCity(CityId(9)))
        ));
    }

    #[test]
    fn infeasible_bounds_rejected() {
        // 10 non-depot cities cannot be covered by 3 tours of at most 3.
        let cities: Vec<City> = (1..=11).map(|i| city(i, i as f64, 0.0)).collect();
        let err = Instance::new("t", cities, 3, 2, 3).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("3*2 = 6"), "{msg}");
        assert!(msg.contains("3*3 = 9"), "{msg}");
    }

    #[test]
    fn duplicate_and_gap_ids_rejected() {
        let dup = vec![city(1, 0.0, 0.0), city(2, 1.0, 0.0), city(2, 2.0, 0.0)];
        assert!(matches!(
            Instance::new("t", dup, 1, 1, 2),
            Err(ModelError::DuplicateCity(CityId(2)))
        ));
        let gap = vec![city(1, 0.0, 0.0), city(3, 1.0, 0.0)];
        assert!(matches!(
            Instance::new("t", gap, 1, 1, 1),
            Err(ModelError::IdGap { missing: 2, .. })
        ));
    }

    #[test]
    fn matrix_cache_matches_on_demand() {
        let mut inst = square();
        let pairs: Vec<(CityId, CityId)> = (1..=4)
            .flat_map(|a| (1..=4).map(move |b| (CityId(a), CityId(b))))
            .collect();
        let fresh: Vec<f64> = pairs.iter().map(|&(a, b)| inst.distance(a, b)).collect();
        inst.cache_distance_matrix().unwrap();
        let cached: Vec<f64> = pairs.iter().map(|&(a, b)| inst.distance(a, b)).collect();
        assert_eq!(fresh, cached);
    }

    #[test]
    fn rounded_metric_follows_tsplib_convention() {
        let mut inst = square();
        assert_eq!(inst.distance(CityId(2), CityId(4)), 2.0f64.sqrt());
        inst.set_metric(DistanceMetric::RoundedTsplib);
        assert_eq!(inst.distance(CityId(2), CityId(4)), 1.0);
    }

    #[test]
    fn validate_accepts_clean_solution() {
        let inst = square();
        let s = Solution::evaluated(
            vec![Tour::new(vec![CityId(2), CityId(3), CityId(4)])],
            &inst,
        )
        .unwrap();
        assert!(validate(&s, &inst).is_clean());
    }

    #[test]
    fn validate_flags_duplicate_and_missing_as_two_violations() {
        let cities: Vec<City> = (1..=7).map(|i| city(i, i as f64, (i % 3) as f64)).collect();
        let inst = Instance::new("t", cities, 2, 2, 4).unwrap();
        let mut s = Solution::evaluated(
            vec![
                Tour::new(vec![CityId(2), CityId(3), CityId(4)]),
                Tour::new(vec![CityId(5), CityId(6), CityId(7)]),
            ],
            &inst,
        )
        .unwrap();
        // Overwrite one slot: city 2 now appears twice, city 5 vanishes.
        s.tours[1].cities[0] = CityId(2);
        s.recompute_tour(1, &inst);
        let report = validate(&s, &inst);
        assert_eq!(report.violations.len(), 2, "{report}");
        assert!(report.violations.contains(&Violation::DuplicateCity {
            city: CityId(2),
            count: 2
        }));
        assert!(report
            .violations
            .contains(&Violation::MissingCity { city: CityId(5) }));
    }

    #[test]
    fn validate_flags_depot_size_count_and_cost_drift() {
        let inst = square();
        let clean = Solution::evaluated(
            vec![Tour::new(vec![CityId(2), CityId(3), CityId(4)])],
            &inst,
        )
        .unwrap();

        let mut with_depot = clean.clone();
        with_depot.tours[0].cities.insert(0, CityId(1));
        with_depot.recompute_tour(0, &inst);
        assert!(validate(&with_depot, &inst)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DepotInTour { tour: 0 })));

        let two_tours = Solution::evaluated(
            vec![
                Tour::new(vec![CityId(2), CityId(3)]),
                Tour::new(vec![CityId(4)]),
            ],
            &inst,
        )
        .unwrap();
        assert!(validate(&two_tours, &inst)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::WrongTourCount { .. })));

        let stale = Solution::with_cached_costs(clean.tours.clone(), vec![99.0], 99.0);
        let report = validate(&stale, &inst);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TourCostMismatch { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TotalCostMismatch { .. })));
    }

    #[test]
    fn cached_costs_survive_tolerance() {
        let inst = square();
        let s = Solution::with_cached_costs(
            vec![Tour::new(vec![CityId(2), CityId(3), CityId(4)])],
            vec![4.0 + 1e-8],
            4.0 - 1e-8,
        );
        assert!(validate(&s, &inst).is_clean());
    }
}
