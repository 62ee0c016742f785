//! Phase 3 local search: segment relocation between tours, single-vertex
//! relocation and pairwise vertex swaps, each followed by 2-opt on the tours
//! it touched.
//!
//! Every scan is best-improvement with a deterministic tie-break: the first
//! candidate in ascending (m, j, p, l, q) scan order wins. A move is applied
//! only when it beats the strict-improvement threshold [`GAIN_EPSILON`].

use std::time::Instant;

use crate::construction::two_opt;
use crate::model::{CityId, Instance, Solution, Tour};
use crate::GAIN_EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    RelocateSubtour,
    RelocateVertex,
    SwapVertices,
}

/// One candidate move.
///
/// `j` is the source tour, `p` the 1-based source position, `m` the segment
/// length (1 for vertex moves). `l` is the target tour; for relocations `q`
/// is the target gap (0 = before the first city), for swaps the 1-based
/// target position. `rho` is +1 to insert a segment forward, -1 reversed.
/// For an intra-tour vertex relocation (`l == j`) the gap `q` refers to the
/// tour as it looks after the removal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub kind: MoveKind,
    pub j: usize,
    pub p: usize,
    pub m: usize,
    pub l: usize,
    pub q: usize,
    pub rho: i8,
    pub gain: f64,
}

fn cycle_node(tour: &Tour, depot: CityId, i: usize) -> CityId {
    if i == 0 || i == tour.len() + 1 {
        depot
    } else {
        tour.cities[i - 1]
    }
}

/// Cost change from deleting the length-`m` segment starting at position `p`
/// (1-based) of tour `j`: the bridging edge minus all removed edges.
/// Negative when the tour gets shorter, which is the usual case.
pub fn removal_gain(s: &Solution, inst: &Instance, j: usize, p: usize, m: usize) -> f64 {
    let tour = &s.tours[j];
    let mj = tour.len();
    assert!(
        p >= 1 && m >= 1 && p + m <= mj + 1,
        "segment start {p} length {m} out of range for a {mj}-city tour"
    );
    let d = inst.depot();
    let prev = cycle_node(tour, d, p - 1);
    let next = cycle_node(tour, d, p + m);
    let first = tour.cities[p - 1];
    let last = tour.cities[p + m - 2];
    let mut chain = 0.0;
    for i in 0..m - 1 {
        chain += inst.distance(tour.cities[p - 1 + i], tour.cities[p + i]);
    }
    inst.distance(prev, next) - inst.distance(prev, first) - chain - inst.distance(last, next)
}

/// Cost change from splicing `segment` into gap `q` of tour `l` (between
/// cycle neighbors q and q+1, depot included at both ends), forward for
/// `rho == 1`, reversed for `rho == -1`.
pub fn insertion_cost(
    s: &Solution,
    inst: &Instance,
    segment: &[CityId],
    l: usize,
    q: usize,
    rho: i8,
) -> f64 {
    assert!(rho == 1 || rho == -1, "rho must be +1 or -1");
    assert!(!segment.is_empty(), "empty segment");
    let tour = &s.tours[l];
    assert!(q <= tour.len(), "gap {q} out of range");
    let d = inst.depot();
    let a = cycle_node(tour, d, q);
    let b = cycle_node(tour, d, q + 1);
    let (head, tail) = if rho == 1 {
        (segment[0], segment[segment.len() - 1])
    } else {
        (segment[segment.len() - 1], segment[0])
    };
    let mut chain = 0.0;
    for w in segment.windows(2) {
        chain += inst.distance(w[0], w[1]);
    }
    inst.distance(a, head) + chain + inst.distance(tail, b) - inst.distance(a, b)
}

/// Picks the cheaper insertion direction for moving the segment
/// `[p, p+m)` of tour `j` into gap `q` of tour `l`; ties go forward (+1).
pub fn choose_direction(
    s: &Solution,
    inst: &Instance,
    j: usize,
    p: usize,
    m: usize,
    l: usize,
    q: usize,
) -> i8 {
    let tj = &s.tours[j];
    let tl = &s.tours[l];
    let d = inst.depot();
    let first = tj.cities[p - 1];
    let last = tj.cities[p + m - 2];
    let a = cycle_node(tl, d, q);
    let b = cycle_node(tl, d, q + 1);
    let forward = inst.distance(a, first) + inst.distance(last, b);
    let backward = inst.distance(a, last) + inst.distance(first, b);
    if forward <= backward {
        1
    } else {
        -1
    }
}

/// Longest segment a relocation may carry right now: limited by the most
/// shrinkable donor and the most expandable receiver.
pub fn eta_max(s: &Solution, inst: &Instance) -> usize {
    let donor = s
        .tours
        .iter()
        .map(|t| t.len().saturating_sub(inst.m_min()))
        .max()
        .unwrap_or(0);
    let receiver = s
        .tours
        .iter()
        .map(|t| inst.m_max().saturating_sub(t.len()))
        .max()
        .unwrap_or(0);
    donor.min(receiver)
}

/// Applies a move without any follow-up 2-opt. The solution's cost caches
/// are refreshed for the touched tours; the cost change equals the move's
/// predicted gain to within the cache tolerance.
pub fn apply_move(s: &mut Solution, inst: &Instance, mv: &Move) {
    match mv.kind {
        MoveKind::RelocateSubtour => {
            let mut seg: Vec<CityId> = s.tours[mv.j]
                .cities
                .drain(mv.p - 1..mv.p - 1 + mv.m)
                .collect();
            if mv.rho == -1 {
                seg.reverse();
            }
            s.tours[mv.l].cities.splice(mv.q..mv.q, seg);
            s.recompute_tour(mv.j, inst);
            s.recompute_tour(mv.l, inst);
        }
        MoveKind::RelocateVertex => {
            let v = s.tours[mv.j].cities.remove(mv.p - 1);
            s.tours[mv.l].cities.insert(mv.q, v);
            s.recompute_tour(mv.j, inst);
            if mv.l != mv.j {
                s.recompute_tour(mv.l, inst);
            }
        }
        MoveKind::SwapVertices => {
            let vj = s.tours[mv.j].cities[mv.p - 1];
            let vl = s.tours[mv.l].cities[mv.q - 1];
            s.tours[mv.j].cities[mv.p - 1] = vl;
            s.tours[mv.l].cities[mv.q - 1] = vj;
            s.recompute_tour(mv.j, inst);
            s.recompute_tour(mv.l, inst);
        }
    }
}

fn polish(s: &mut Solution, inst: &Instance, touched: &[usize]) {
    for &idx in touched {
        two_opt(&mut s.tours[idx], inst);
        s.recompute_tour(idx, inst);
    }
}

/// Combined gain of relocating the segment `[p, p+m)` of tour `j` into gap
/// `q` of tour `l` with the cheaper direction. The internal chain cost
/// cancels between removal and insertion and is skipped entirely.
pub fn subtour_move_gain(
    s: &Solution,
    inst: &Instance,
    j: usize,
    p: usize,
    m: usize,
    l: usize,
    q: usize,
) -> (i8, f64) {
    let tj = &s.tours[j];
    let tl = &s.tours[l];
    let d = inst.depot();
    let prev = cycle_node(tj, d, p - 1);
    let next = cycle_node(tj, d, p + m);
    let first = tj.cities[p - 1];
    let last = tj.cities[p + m - 2];
    let removal = inst.distance(prev, next)
        - inst.distance(prev, first)
        - inst.distance(last, next);
    let a = cycle_node(tl, d, q);
    let b = cycle_node(tl, d, q + 1);
    let base = inst.distance(a, b);
    let forward = inst.distance(a, first) + inst.distance(last, b);
    let backward = inst.distance(a, last) + inst.distance(first, b);
    if forward <= backward {
        (1, removal + forward - base)
    } else {
        (-1, removal + backward - base)
    }
}

/// Gain of moving the single vertex at position `p` of tour `j` into gap `q`
/// of tour `l`. For `l == j` the gap refers to the post-removal tour.
pub fn vertex_move_gain(
    s: &Solution,
    inst: &Instance,
    j: usize,
    p: usize,
    l: usize,
    q: usize,
) -> f64 {
    let tj = &s.tours[j];
    let mj = tj.len();
    let d = inst.depot();
    let v = tj.cities[p - 1];
    let prev = cycle_node(tj, d, p - 1);
    let next = cycle_node(tj, d, p + 1);
    let removal = inst.distance(prev, next) - inst.distance(prev, v) - inst.distance(v, next);
    let (a, b) = if l == j {
        // Neighbors of gap q in the tour with position p removed.
        let post = |i: usize| -> CityId {
            if i == 0 || i == mj {
                d
            } else if i - 1 < p - 1 {
                tj.cities[i - 1]
            } else {
                tj.cities[i]
            }
        };
        (post(q), post(q + 1))
    } else {
        let tl = &s.tours[l];
        (cycle_node(tl, d, q), cycle_node(tl, d, q + 1))
    };
    removal + inst.distance(a, v) + inst.distance(v, b) - inst.distance(a, b)
}

/// Gain of exchanging the vertices at position `p` of tour `j` and position
/// `q` of tour `l != j`: each vertex takes over the other's exact slot, so
/// the two per-tour deltas are independent and sum to the true cost change.
pub fn swap_gain(s: &Solution, inst: &Instance, j: usize, p: usize, l: usize, q: usize) -> f64 {
    debug_assert_ne!(j, l);
    let d = inst.depot();
    let tj = &s.tours[j];
    let tl = &s.tours[l];
    let vj = tj.cities[p - 1];
    let vl = tl.cities[q - 1];
    let (jp, jn) = (cycle_node(tj, d, p - 1), cycle_node(tj, d, p + 1));
    let (lp, ln) = (cycle_node(tl, d, q - 1), cycle_node(tl, d, q + 1));
    inst.distance(jp, vl) + inst.distance(vl, jn) - inst.distance(jp, vj) - inst.distance(vj, jn)
        + inst.distance(lp, vj) + inst.distance(vj, ln)
        - inst.distance(lp, vl)
        - inst.distance(vl, ln)
}

/// The naive sum removal-gain + insertion-cost for a swap, as if the two
/// relocations were independent. Wrong as a cost delta, because each
/// insertion prices edges to a vertex the other half of the swap removes;
/// kept only so tests can document the divergence from [`swap_gain`].
#[cfg(test)]
pub(crate) fn swap_gain_literal(
    s: &Solution,
    inst: &Instance,
    j: usize,
    p: usize,
    l: usize,
    q: usize,
) -> f64 {
    let vj = s.tours[j].cities[p - 1];
    let vl = s.tours[l].cities[q - 1];
    removal_gain(s, inst, j, p, 1)
        + insertion_cost(s, inst, &[vj], l, q, 1)
        + removal_gain(s, inst, l, q, 1)
        + insertion_cost(s, inst, &[vl], j, p, 1)
}

/// Repeatedly applies the best segment relocation until none improves.
/// Segment lengths range over `[2, eta_max]`, recomputed every iteration
/// since applied moves change tour sizes. Both touched tours get a 2-opt
/// pass after each applied move. Returns the number of applied moves.
pub fn relocate_subtours(s: &mut Solution, inst: &Instance) -> usize {
    relocate_subtours_until(s, inst, None)
}

/// [`relocate_subtours`] with a wall-clock cutoff, checked between moves so
/// the solution is always left in a consistent state.
pub fn relocate_subtours_until(
    s: &mut Solution,
    inst: &Instance,
    deadline: Option<Instant>,
) -> usize {
    let k = s.tours.len();
    let (m_min, m_max) = (inst.m_min(), inst.m_max());
    let mut applied = 0;
    loop {
        if deadline.is_some_and(|t| Instant::now() >= t) {
            return applied;
        }
        let eta = eta_max(s, inst);
        let mut best: Option<Move> = None;
        for m in 2..=eta {
            for j in 0..k {
                let mj = s.tours[j].len();
                if mj < m_min + m {
                    continue;
                }
                for p in 1..=mj - m + 1 {
                    for l in 0..k {
                        if l == j || s.tours[l].len() + m > m_max {
                            continue;
                        }
                        for q in 0..=s.tours[l].len() {
                            let (rho, gain) = subtour_move_gain(s, inst, j, p, m, l, q);
                            if best.as_ref().map_or(true, |b| gain < b.gain) {
                                best = Some(Move {
                                    kind: MoveKind::RelocateSubtour,
                                    j,
                                    p,
                                    m,
                                    l,
                                    q,
                                    rho,
                                    gain,
                                });
                            }
                        }
                    }
                }
            }
        }
        match best {
            Some(mv) if mv.gain < -GAIN_EPSILON => {
                apply_move(s, inst, &mv);
                polish(s, inst, &[mv.j, mv.l]);
                applied += 1;
            }
            _ => return applied,
        }
    }
}

/// One best-improvement pass over all single-vertex relocations, including
/// within a tour. Inter-tour moves need the donor above `m_min` and the
/// receiver below `m_max`; intra-tour moves keep the size unchanged and
/// skip those guards. Applies at most one move (then 2-opt on the touched
/// tours) and returns its gain, or 0 if nothing improves.
pub fn relocate_a_vertex(s: &mut Solution, inst: &Instance) -> f64 {
    let k = s.tours.len();
    let (m_min, m_max) = (inst.m_min(), inst.m_max());
    let mut best: Option<Move> = None;
    for j in 0..k {
        let mj = s.tours[j].len();
        for p in 1..=mj {
            for l in 0..k {
                if l == j {
                    if mj < 2 {
                        continue;
                    }
                    // Gap mj-1 is the slot the vertex vacated; its gain is
                    // exactly zero and never survives the epsilon test.
                    for q in 0..=mj - 1 {
                        let gain = vertex_move_gain(s, inst, j, p, l, q);
                        if best.as_ref().map_or(true, |b| gain < b.gain) {
                            best = Some(Move {
                                kind: MoveKind::RelocateVertex,
                                j,
                                p,
                                m: 1,
                                l,
                                q,
                                rho: 1,
                                gain,
                            });
                        }
                    }
                } else {
                    if mj <= m_min || s.tours[l].len() >= m_max {
                        continue;
                    }
                    for q in 0..=s.tours[l].len() {
                        let gain = vertex_move_gain(s, inst, j, p, l, q);
                        if best.as_ref().map_or(true, |b| gain < b.gain) {
                            best = Some(Move {
                                kind: MoveKind::RelocateVertex,
                                j,
                                p,
                                m: 1,
                                l,
                                q,
                                rho: 1,
                                gain,
                            });
                        }
                    }
                }
            }
        }
    }
    match best {
        Some(mv) if mv.gain < -GAIN_EPSILON => {
            apply_move(s, inst, &mv);
            if mv.l == mv.j {
                polish(s, inst, &[mv.j]);
            } else {
                polish(s, inst, &[mv.j, mv.l]);
            }
            mv.gain
        }
        _ => 0.0,
    }
}

/// One best-improvement pass over all cross-tour vertex exchanges (ordered
/// pairs j < l). Tour sizes are unchanged by a swap, so no bound guards
/// apply. Applies at most one exchange (then 2-opt on both tours) and
/// returns its gain, or 0 if nothing improves.
pub fn swap_vertices(s: &mut Solution, inst: &Instance) -> f64 {
    let k = s.tours.len();
    let mut best: Option<Move> = None;
    for j in 0..k {
        for p in 1..=s.tours[j].len() {
            for l in j + 1..k {
                for q in 1..=s.tours[l].len() {
                    let gain = swap_gain(s, inst, j, p, l, q);
                    if best.as_ref().map_or(true, |b| gain < b.gain) {
                        best = Some(Move {
                            kind: MoveKind::SwapVertices,
                            j,
                            p,
                            m: 1,
                            l,
                            q,
                            rho: 1,
                            gain,
                        });
                    }
                }
            }
        }
    }
    match best {
        Some(mv) if mv.gain < -GAIN_EPSILON => {
            apply_move(s, inst, &mv);
            polish(s, inst, &[mv.j, mv.l]);
            mv.gain
        }
        _ => 0.0,
    }
}
