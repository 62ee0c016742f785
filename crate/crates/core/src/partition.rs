//! Phase 1: split the non-depot cities into `k` subsets by seeding each
//! subset with a random vertex, growing every subset to `m_min` in rounds,
//! then assigning the remainder greedily under the `m_max` cap.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{CityId, Instance};

/// A partition of the non-depot cities into `k` subsets. Subsets are kept
/// sorted by id; their index is their identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub subsets: Vec<Vec<CityId>>,
    pub rng_seed: u64,
}

/// Loop counters, exposed so tests can pin the exact amount of work done:
/// stage 1 performs `k*(m_min-1)` absorption steps, stage 2 assigns the
/// remaining `n - k*m_min` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionStats {
    pub stage1_steps: usize,
    pub stage2_steps: usize,
}

/// Among `unassigned`, finds the vertex closest to any member of `subset`.
/// Distance ties go to the lowest city id.
///
/// Panics if either slice is empty: callers own the non-emptiness contract.
pub fn nearest_unassigned(
    subset: &[CityId],
    unassigned: &[CityId],
    inst: &Instance,
) -> (CityId, f64) {
    assert!(!subset.is_empty(), "nearest_unassigned: empty subset");
    assert!(
        !unassigned.is_empty(),
        "nearest_unassigned: no unassigned vertices"
    );
    let mut best: Option<(f64, CityId)> = None;
    // Ascending id scan plus strict < keeps the lowest id among ties.
    for &cand in unassigned {
        let mut d = f64::INFINITY;
        for &member in subset {
            let w = inst.distance(cand, member);
            if w < d {
                d = w;
            }
        }
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, cand));
        }
    }
    let (d, c) = best.unwrap();
    (c, d)
}

/// Partitions the instance's cities with the given RNG seed.
pub fn partition(inst: &Instance, seed: u64) -> Partition {
    partition_with_stats(inst, seed).0
}

/// Same as [`partition`], also reporting the per-stage step counters.
pub fn partition_with_stats(inst: &Instance, seed: u64) -> (Partition, PartitionStats) {
    let k = inst.k();
    let (m_min, m_max) = (inst.m_min(), inst.m_max());
    let n = inst.n();
    // Instance construction already guarantees k*m_min <= n <= k*m_max, so
    // both stages below always find capacity; nothing here can fail.
    debug_assert!(k * m_min <= n && n <= k * m_max);

    let mut ids = inst.non_depot_ids();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (seed_vertices, _) = ids.partial_shuffle(&mut rng, k);
    let mut subsets: Vec<Vec<CityId>> = seed_vertices.iter().map(|&v| vec![v]).collect();

    let mut assigned = vec![false; n + 2];
    for s in &subsets {
        assigned[s[0].0 as usize] = true;
    }
    let all_ids = inst.non_depot_ids();
    let unassigned_ids =
        |assigned: &[bool]| -> Vec<CityId> { all_ids.iter().copied().filter(|c| !assigned[c.0 as usize]).collect() };

    // Stage 1: in rounds, each subset in index order absorbs its nearest
    // unassigned vertex until every subset holds m_min cities.
    let mut stage1_steps = 0;
    for _ in 2..=m_min {
        for subset in subsets.iter_mut() {
            let pool = unassigned_ids(&assigned);
            let (city, _) = nearest_unassigned(subset, &pool, inst);
            assigned[city.0 as usize] = true;
            subset.push(city);
            stage1_steps += 1;
        }
    }

    // Stage 2: repeatedly assign the globally best (vertex, subset) pair
    // among subsets still below m_max. Ties: lowest city id, then lowest
    // subset index.
    let mut stage2_steps = 0;
    loop {
        let pool = unassigned_ids(&assigned);
        if pool.is_empty() {
            break;
        }
        let mut best: Option<(f64, CityId, usize)> = None;
        for (j, subset) in subsets.iter().enumerate() {
            if subset.len() >= m_max {
                continue;
            }
            let (city, d) = nearest_unassigned(subset, &pool, inst);
            let better = match best {
                None => true,
                Some((bd, bc, _)) => d < bd || (d == bd && city < bc),
            };
            if better {
                best = Some((d, city, j));
            }
        }
        let (_, city, j) = best.expect("n <= k*m_max leaves capacity for every vertex");
        assigned[city.0 as usize] = true;
        subsets[j].push(city);
        stage2_steps += 1;
    }

    for s in subsets.iter_mut() {
        s.sort();
    }
    assert_eq!(stage1_steps, k * (m_min - 1));
    assert_eq!(stage2_steps, n - k * m_min);
    (
        Partition {
            subsets,
            rng_seed: seed,
        },
        PartitionStats {
            stage1_steps,
            stage2_steps,
        },
    )
}
