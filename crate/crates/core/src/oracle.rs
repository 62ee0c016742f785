//! Brute-force reference solver for tiny instances.
//!
//! Deliberately naive: enumerate every partition of the cities into k
//! bounded blocks, then every tour order within each block. No shortcuts
//! shared with the heuristic, so agreement between the two is meaningful.
//! Guarded by size asserts; use only in tests and tooling.

use std::collections::HashMap;

use crate::model::{CityId, Instance, Solution, Tour};

/// Hard ceilings for [`solve_exact`]; beyond them full enumeration stops
/// being a reasonable thing to wait for.
pub const EXACT_MAX_CITIES: usize = 10;
pub const EXACT_MAX_SALESMEN: usize = 3;

/// All partitions of `ids` into exactly `k` unlabeled blocks with sizes in
/// `[m_min, m_max]`. Each block is ascending and blocks are ordered by
/// their smallest member, so every partition appears exactly once.
fn block_partitions(
    ids: &[CityId],
    k: usize,
    m_min: usize,
    m_max: usize,
) -> Vec<Vec<Vec<CityId>>> {
    fn rec(
        ids: &[CityId],
        idx: usize,
        k: usize,
        m_min: usize,
        m_max: usize,
        blocks: &mut Vec<Vec<CityId>>,
        out: &mut Vec<Vec<Vec<CityId>>>,
    ) {
        let remaining = ids.len() - idx;
        let deficit: usize = blocks
            .iter()
            .map(|b| m_min.saturating_sub(b.len()))
            .sum::<usize>()
            + (k - blocks.len()) * m_min;
        let headroom: usize =
            blocks.iter().map(|b| m_max - b.len()).sum::<usize>() + (k - blocks.len()) * m_max;
        if remaining < deficit || remaining > headroom {
            return;
        }
        if idx == ids.len() {
            if blocks.len() == k {
                out.push(blocks.clone());
            }
            return;
        }
        for b in 0..blocks.len() {
            if blocks[b].len() < m_max {
                blocks[b].push(ids[idx]);
                rec(ids, idx + 1, k, m_min, m_max, blocks, out);
                blocks[b].pop();
            }
        }
        // A fresh block always starts with the smallest unassigned id.
        if blocks.len() < k {
            blocks.push(vec![ids[idx]]);
            rec(ids, idx + 1, k, m_min, m_max, blocks, out);
            blocks.pop();
        }
    }
    let mut out = Vec::new();
    rec(ids, 0, k, m_min, m_max, &mut Vec::new(), &mut out);
    out
}

fn for_each_perm(items: &mut [CityId], f: &mut impl FnMut(&[CityId])) {
    fn rec(items: &mut [CityId], k: usize, f: &mut impl FnMut(&[CityId])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            rec(items, k + 1, f);
            items.swap(k, i);
        }
    }
    rec(items, 0, f);
}

fn path_cost(seq: &[CityId], inst: &Instance) -> f64 {
    let d = inst.depot();
    let mut cost = inst.distance(d, seq[0]);
    for w in seq.windows(2) {
        cost += inst.distance(w[0], w[1]);
    }
    cost + inst.distance(seq[seq.len() - 1], d)
}

/// Cheapest depot-anchored tour through exactly the given cities, by trying
/// every order. Ties keep the first order found, so the result is
/// deterministic for a fixed input.
pub fn optimal_tour(block: &[CityId], inst: &Instance) -> (Tour, f64) {
    assert!(!block.is_empty());
    let mut items = block.to_vec();
    let mut best_cost = f64::INFINITY;
    let mut best_seq = items.clone();
    for_each_perm(&mut items, &mut |seq| {
        let cost = path_cost(seq, inst);
        if cost < best_cost {
            best_cost = cost;
            best_seq = seq.to_vec();
        }
    });
    (Tour::new(best_seq), best_cost)
}

/// Exact optimum by full enumeration. Panics on instances big enough to
/// make that a mistake.
pub fn solve_exact(inst: &Instance) -> Solution {
    assert!(
        inst.n() <= EXACT_MAX_CITIES && inst.k() <= EXACT_MAX_SALESMEN,
        "exhaustive solve is limited to n <= {EXACT_MAX_CITIES}, k <= {EXACT_MAX_SALESMEN}"
    );
    let ids = inst.non_depot_ids();
    let partitions = block_partitions(&ids, inst.k(), inst.m_min(), inst.m_max());
    assert!(!partitions.is_empty(), "instance admits no partition");

    let mut tour_memo: HashMap<Vec<CityId>, (Tour, f64)> = HashMap::new();
    let mut best: Option<(Vec<Tour>, f64)> = None;
    for blocks in &partitions {
        let mut tours = Vec::with_capacity(blocks.len());
        let mut total = 0.0;
        for block in blocks {
            let (tour, cost) = tour_memo
                .entry(block.clone())
                .or_insert_with(|| optimal_tour(block, inst))
                .clone();
            total += cost;
            tours.push(tour);
        }
        if best.as_ref().map_or(true, |(_, c)| total < *c) {
            best = Some((tours, total));
        }
    }
    let (tours, _) = best.unwrap();
    Solution::evaluated(tours, inst).expect("enumerated solution is well-formed")
}

/// Direction-normalized, order-normalized city sequences of a tour set:
/// each tour is flipped so its first city id is below its last, then tours
/// sort lexicographically. Two solutions describe the same routes exactly
/// when their canonical forms are equal.
pub fn canonical_form(tours: &[Tour]) -> Vec<Vec<CityId>> {
    let mut rows: Vec<Vec<CityId>> = tours
        .iter()
        .map(|t| {
            let mut seq = t.cities.clone();
            if seq.len() >= 2 && seq[0] > seq[seq.len() - 1] {
                seq.reverse();
            }
            seq
        })
        .collect();
    rows.sort();
    rows
}

/// Every feasible solution, one representative per direction-equivalence
/// class, in canonical form. Only for completeness-style tests; the count
/// explodes factorially.
pub fn enumerate_feasible(inst: &Instance) -> Vec<Solution> {
    assert!(inst.n() <= 6, "feasible-set enumeration is limited to n <= 6");
    let ids = inst.non_depot_ids();
    let partitions = block_partitions(&ids, inst.k(), inst.m_min(), inst.m_max());

    let mut out = Vec::new();
    for blocks in &partitions {
        // All tour orders per block, keeping one of each reversal pair.
        let per_block: Vec<Vec<Vec<CityId>>> = blocks
            .iter()
            .map(|block| {
                let mut orders = Vec::new();
                let mut items = block.to_vec();
                for_each_perm(&mut items, &mut |seq| {
                    if seq.len() < 2 || seq[0] < seq[seq.len() - 1] {
                        orders.push(seq.to_vec());
                    }
                });
                orders
            })
            .collect();
        let mut choice = vec![0usize; blocks.len()];
        loop {
            let tours: Vec<Tour> = choice
                .iter()
                .enumerate()
                .map(|(b, &c)| Tour::new(per_block[b][c].clone()))
                .collect();
            out.push(Solution::evaluated(tours, inst).expect("enumerated solution is well-formed"));
            // Odometer increment over the per-block choices.
            let mut b = 0;
            loop {
                if b == choice.len() {
                    break;
                }
                choice[b] += 1;
                if choice[b] < per_block[b].len() {
                    break;
                }
                choice[b] = 0;
                b += 1;
            }
            if b == choice.len() {
                break;
            }
        }
    }
    out
}
