//! Release gate: one test per shipping criterion, each printing a PASS line
//! with the measured numbers (visible under --nocapture). Run with
//! `cargo test -p bmtsp --test acceptance -- --test-threads=1 --nocapture`
//! for an ordered, annotated transcript.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bmtsp::construction::two_opt;
use bmtsp::improvement::{self, Move, MoveKind};
use bmtsp::model::{tour_cost, validate, City, CityId, Instance, Solution, Tour};
use bmtsp::solver::{self, SolverConfig};
use bmtsp::{ilp, io, oracle, partition};

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn load(path: &Path) -> Instance {
    io::parse_instance(&fs::read_to_string(path).unwrap())
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn instance(coords: &[(f64, f64)], k: usize, m_min: usize, m_max: usize) -> Instance {
    let cities = coords
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| City { id: CityId(i as u32 + 1), x, y })
        .collect();
    Instance::new("t", cities, k, m_min, m_max).unwrap()
}

fn random_coords(rng: &mut ChaCha8Rng, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
        .collect()
}

/// Random feasible solution: shuffle the cities, then deal them into k tours
/// with sizes drawn inside the bounds.
fn random_solution(inst: &Instance, rng: &mut ChaCha8Rng) -> Solution {
    let mut ids = inst.non_depot_ids();
    ids.shuffle(rng);
    let (n, k) = (inst.n(), inst.k());
    let mut sizes = vec![inst.m_min(); k];
    let mut left = n - k * inst.m_min();
    while left > 0 {
        let j = rng.gen_range(0..k);
        if sizes[j] < inst.m_max() {
            sizes[j] += 1;
            left -= 1;
        }
    }
    let mut tours = Vec::with_capacity(k);
    let mut at = 0;
    for size in sizes {
        tours.push(Tour::new(ids[at..at + size].to_vec()));
        at += size;
    }
    Solution::evaluated(tours, inst).unwrap()
}

#[test]
fn criterion_01_feasibility_suite() {
    let start = Instant::now();
    let mut solved = 0usize;

    let legacy_dir = repo("instances/legacy");
    let mut legacy: Vec<PathBuf> = fs::read_dir(&legacy_dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bmtsp"))
        .collect();
    legacy.sort();
    assert_eq!(legacy.len(), 22, "legacy corpus must hold the 22 benchmark instances");

    let gen_dir = tempfile::tempdir().unwrap();
    let mut sources: Vec<PathBuf> = fs::read_dir(repo("instances/src"))
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsp"))
        .collect();
    sources.sort();
    for src_path in &sources {
        let src = io::parse_bmtsp(&fs::read_to_string(src_path).unwrap()).unwrap();
        for m_max in [25, 30, 40, 50, 60] {
            match io::generate_instance(&src, m_max, false) {
                Ok(inst) => {
                    let path = gen_dir.path().join(format!("{}.bmtsp", inst.name()));
                    fs::write(&path, io::write_instance(&inst, &[])).unwrap();
                }
                Err(io::IoError::Model(bmtsp::model::ModelError::Infeasible { .. })) => {}
                Err(e) => panic!("{}: {e}", src_path.display()),
            }
        }
    }
    let mut generated: Vec<PathBuf> = fs::read_dir(gen_dir.path())
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    generated.sort();
    assert!(generated.len() >= 30, "only {} generated instances", generated.len());

    for path in legacy.iter().chain(&generated) {
        let mut inst = load(path);
        inst.cache_distance_matrix().unwrap();
        let dim = inst.n() + 1;
        let cfg = SolverConfig {
            seed: 7,
            restarts: if dim >= 800 { 2 } else { 8 },
            time_limit: Some(Duration::from_secs(if dim >= 800 { 30 } else { 60 })),
            ..SolverConfig::default()
        };
        let report = solver::solve(&inst, &cfg).unwrap();
        let verdict = validate(&report.best, &inst);
        assert!(verdict.is_clean(), "{}: {verdict}", path.display());
        solved += 1;
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30 * 60), "suite took {elapsed:?}");
    println!(
        "criterion 1 PASS: {solved} instances ({} legacy + {} generated) validate clean in {:.0?}",
        legacy.len(),
        generated.len(),
        elapsed
    );
}

#[test]
fn criterion_02_benchmark_quality() {
    // Published reference costs for the four desk-scale rows, at the bounds
    // the shipped instance files carry. Deviation is measured two-sided: a
    // result below the proven optimum would mean the bounds drifted.
    let rows: [(&str, f64, f64); 4] = [
        ("eil51_3.bmtsp", 464.11, 0.010),
        ("berlin52_2.bmtsp", 7_753.89, 0.010),
        ("eil51_5.bmtsp", 529.70, 0.020),
        ("berlin52_5.bmtsp", 9_118.29, 0.020),
    ];
    let mut report_lines = Vec::new();
    for (file, target, tol) in rows {
        let mut inst = load(&repo("instances/legacy").join(file));
        inst.cache_distance_matrix().unwrap();
        let cfg = SolverConfig { seed: 11, restarts: 20, ..SolverConfig::default() };
        let t = Instant::now();
        let report = solver::solve(&inst, &cfg).unwrap();
        let wall = t.elapsed();
        assert!(wall <= Duration::from_secs(120), "{file}: run took {wall:?}");
        let best = report.best.total_cost;
        let dev = (best - target).abs() / target;
        assert!(
            dev <= tol,
            "{file}: best-of-20 {best:.2} deviates {:.2}% from {target} (allowed {:.1}%)",
            dev * 100.0,
            tol * 100.0
        );
        report_lines.push(format!("{file} {best:.2} ({:+.2}%)", (best - target) / target * 100.0));
    }
    println!("criterion 2 PASS: {}", report_lines.join(", "));
}

#[test]
fn criterion_03_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    let mut within = 0usize;
    for case in 0..25usize {
        let n = 6 + case % 3;
        let (m_min, m_max) = if case % 2 == 0 { (2, 4) } else { (3, 5) };
        let inst = instance(&random_coords(&mut rng, n + 1), 2, m_min, m_max);
        let exact = oracle::solve_exact(&inst);
        let cfg = SolverConfig { seed: case as u64, restarts: 10, ..SolverConfig::default() };
        let heur = solver::solve(&inst, &cfg).unwrap().best;
        assert!(
            heur.total_cost >= exact.total_cost - 1e-6,
            "case {case}: heuristic {} beat the exhaustive optimum {}",
            heur.total_cost,
            exact.total_cost
        );
        if heur.total_cost <= exact.total_cost * 1.05 {
            within += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(within >= 22, "only {within}/25 within 5% of the optimum");
    assert!(elapsed < Duration::from_secs(5 * 60), "took {elapsed:?}");
    println!("criterion 3 PASS: {within}/25 micro-instances within 5% of exhaustive optimum in {elapsed:.0?}");
}

#[test]
fn criterion_04_gain_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6A19);
    let (mut subtours, mut vertices, mut swaps) = (0usize, 0usize, 0usize);
    let mut worst = 0f64;

    let mut check = |s: &Solution, inst: &Instance, mv: Move, count: &mut usize| {
        let mut scratch = s.clone();
        improvement::apply_move(&mut scratch, inst, &mv);
        let actual = scratch.total_cost - s.total_cost;
        let err = (mv.gain - actual).abs();
        assert!(err <= 1e-6, "{mv:?}: predicted {} actual {actual}", mv.gain);
        if err > worst {
            worst = err;
        }
        *count += 1;
    };

    while subtours < 1000 || vertices < 1000 || swaps < 1000 {
        let n: usize = rng.gen_range(10..=14);
        let k = rng.gen_range(2..=3);
        let m_min = 1 + n / (3 * k);
        let m_max = n.div_ceil(k) + 2;
        let inst = instance(&random_coords(&mut rng, n + 1), k, m_min, m_max);
        let s = random_solution(&inst, &mut rng);
        let sizes: Vec<usize> = s.tours.iter().map(|t| t.len()).collect();
        let eta = improvement::eta_max(&s, &inst);

        for j in 0..k {
            for m in 2..=eta.min(sizes[j]) {
                if sizes[j] - m < inst.m_min() {
                    continue;
                }
                for p in 1..=sizes[j] - m + 1 {
                    for l in 0..k {
                        if l == j || sizes[l] + m > inst.m_max() {
                            continue;
                        }
                        for q in 0..=sizes[l] {
                            let (rho, gain) = improvement::subtour_move_gain(&s, &inst, j, p, m, l, q);
                            let mv = Move { kind: MoveKind::RelocateSubtour, j, p, m, l, q, rho, gain };
                            check(&s, &inst, mv, &mut subtours);
                        }
                    }
                }
            }
        }
        for j in 0..k {
            for p in 1..=sizes[j] {
                for l in 0..k {
                    if l == j {
                        if sizes[j] < 2 {
                            continue;
                        }
                        for q in 0..sizes[j] {
                            let gain = improvement::vertex_move_gain(&s, &inst, j, p, l, q);
                            let mv = Move { kind: MoveKind::RelocateVertex, j, p, m: 1, l, q, rho: 1, gain };
                            check(&s, &inst, mv, &mut vertices);
                        }
                    } else {
                        if sizes[j] - 1 < inst.m_min() || sizes[l] + 1 > inst.m_max() {
                            continue;
                        }
                        for q in 0..=sizes[l] {
                            let gain = improvement::vertex_move_gain(&s, &inst, j, p, l, q);
                            let mv = Move { kind: MoveKind::RelocateVertex, j, p, m: 1, l, q, rho: 1, gain };
                            check(&s, &inst, mv, &mut vertices);
                        }
                    }
                }
            }
        }
        for j in 0..k {
            for l in j + 1..k {
                for p in 1..=sizes[j] {
                    for q in 1..=sizes[l] {
                        let gain = improvement::swap_gain(&s, &inst, j, p, l, q);
                        let mv = Move { kind: MoveKind::SwapVertices, j, p, m: 1, l, q, rho: 1, gain };
                        check(&s, &inst, mv, &mut swaps);
                    }
                }
            }
        }
    }
    println!(
        "criterion 4 PASS: {subtours} segment, {vertices} vertex and {swaps} swap moves \
         replayed; worst |predicted - actual| = {worst:.2e}"
    );
}

#[test]
fn criterion_05_monotone_descent() {
    let mut checked = 0usize;
    for file in ["eil51_3.bmtsp", "eil51_7.bmtsp", "berlin52_5.bmtsp", "rat99_3.bmtsp"] {
        let inst = load(&repo("instances/legacy").join(file));
        let cfg = SolverConfig { seed: 3, restarts: 10, ..SolverConfig::default() };
        let report = solver::solve(&inst, &cfg).unwrap();
        for r in &report.restarts {
            for pair in r.trajectory.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-9,
                    "{file} restart {}: {} -> {}",
                    r.index,
                    pair[0],
                    pair[1]
                );
            }
            checked += 1;
        }
    }
    println!("criterion 5 PASS: {checked} restart trajectories non-increasing after construction");
}

#[test]
fn criterion_06_two_opt_local_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x20_07);
    for case in 0..100 {
        let inst = instance(&random_coords(&mut rng, 11), 1, 10, 10);
        let mut ids = inst.non_depot_ids();
        ids.shuffle(&mut rng);
        let mut tour = Tour::new(ids);
        two_opt(&mut tour, &inst);
        let base = tour_cost(&tour, &inst).unwrap();
        // Independent check: rebuild and price every segment reversal.
        for a in 0..tour.len() {
            for b in a + 1..tour.len() {
                let mut alt = tour.clone();
                alt.cities[a..=b].reverse();
                let cost = tour_cost(&alt, &inst).unwrap();
                assert!(
                    cost >= base - 1e-9,
                    "case {case}: reversing {a}..={b} gains {}",
                    base - cost
                );
            }
        }
    }
    println!("criterion 6 PASS: 100 random 10-city tours are pairwise-exchange optimal after 2-opt");
}

#[test]
fn criterion_07_partition_properties() {
    let files = [
        "eil51_2.bmtsp",
        "eil51_3.bmtsp",
        "eil51_5.bmtsp",
        "eil51_7.bmtsp",
        "berlin52_2.bmtsp",
        "berlin52_3.bmtsp",
        "eil76_5.bmtsp",
        "rat99_7.bmtsp",
        "pr76_5.bmtsp",
        "pr152_5.bmtsp",
    ];
    let mut runs = 0usize;
    for file in files {
        let inst = load(&repo("instances/legacy").join(file));
        let mut expected = inst.non_depot_ids();
        expected.sort();
        for seed in 0..100u64 {
            let (part, stats) = partition::partition_with_stats(&inst, seed);
            assert_eq!(part.subsets.len(), inst.k());
            let mut union: Vec<CityId> = part.subsets.iter().flatten().copied().collect();
            union.sort();
            assert_eq!(union, expected, "{file} seed {seed}: not a disjoint cover");
            for subset in &part.subsets {
                assert!(
                    (inst.m_min()..=inst.m_max()).contains(&subset.len()),
                    "{file} seed {seed}: subset size {} outside bounds",
                    subset.len()
                );
            }
            assert_eq!(stats.stage1_steps, inst.k() * (inst.m_min() - 1));
            assert_eq!(stats.stage2_steps, inst.n() - inst.k() * inst.m_min());
            runs += 1;
        }
    }
    println!("criterion 7 PASS: {runs} partitions (100 seeds x {} instances) check out", files.len());
}

#[test]
fn criterion_08_ilp_encoding() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11F);
    let mut sound = 0usize;
    while sound < 200 {
        let n: usize = rng.gen_range(6..=12);
        let k = rng.gen_range(2..=3);
        let m_min = 2.min(n / k);
        let m_max = n.div_ceil(k) + rng.gen_range(0..=2);
        let inst = instance(&random_coords(&mut rng, n + 1), k, m_min, m_max);
        let model = ilp::build_model(&inst);
        for _ in 0..5 {
            let s = random_solution(&inst, &mut rng);
            let eval = ilp::evaluate(&model, &s, &inst).unwrap();
            assert!(eval.is_feasible(), "violations: {:?}", eval.violations);
            assert!(
                (eval.objective - s.total_cost).abs() <= 1e-6,
                "objective {} vs cost {}",
                eval.objective,
                s.total_cost
            );
            sound += 1;
        }
    }

    // Completeness at enumerable size: the encoding admits exactly the
    // brute-force feasible set.
    let mut complete = 0usize;
    for (n, k, m_min, m_max) in [(5, 2, 2, 3), (4, 2, 2, 2), (5, 2, 2, 2)] {
        if k * m_min > n || n > k * m_max {
            continue;
        }
        let inst = instance(&random_coords(&mut rng, n + 1), k, m_min, m_max);
        let from_ilp = ilp::enumerate_ilp_feasible(&inst);
        let mut ilp_forms: Vec<Vec<Vec<CityId>>> =
            from_ilp.iter().map(|tours| oracle::canonical_form(tours)).collect();
        ilp_forms.sort();
        ilp_forms.dedup();
        let mut oracle_forms: Vec<Vec<Vec<CityId>>> = oracle::enumerate_feasible(&inst)
            .iter()
            .map(|s| oracle::canonical_form(&s.tours))
            .collect();
        oracle_forms.sort();
        oracle_forms.dedup();
        assert_eq!(ilp_forms, oracle_forms, "n={n} k={k} [{m_min},{m_max}]");
        complete += oracle_forms.len();
    }
    println!(
        "criterion 8 PASS: 200 random solutions score clean; exhaustive sets match on {complete} \
         canonical solutions"
    );
}

#[test]
fn criterion_09_instance_generation() {
    let src_text = fs::read_to_string(repo("instances/src/pr439.tsp")).unwrap();
    let expected = [(50usize, 12usize), (40, 15), (30, 19)];
    for (m_max, k) in expected {
        assert_eq!((13 * 438usize).div_ceil(10 * m_max), k, "fleet formula, m_max={m_max}");
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let src = io::parse_bmtsp(&src_text).unwrap();
            let inst = io::generate_instance(&src, m_max, false).unwrap();
            assert_eq!(inst.name(), format!("pr439_{k}"));
            assert_eq!(inst.k(), k);
            outputs.push(io::write_instance(&inst, &[]));
        }
        assert_eq!(outputs[0], outputs[1], "m_max={m_max} regeneration drifted");
    }

    // Counting the depot into n is how some historical files were named; the
    // flag must expose both fleets deterministically (19 vs 20 at size 30).
    let mut flagged = Vec::new();
    for _ in 0..2 {
        let src = io::parse_bmtsp(&src_text).unwrap();
        let inst = io::generate_instance(&src, 30, true).unwrap();
        assert_eq!(inst.name(), "pr439_20");
        flagged.push(io::write_instance(&inst, &[]));
    }
    assert_eq!(flagged[0], flagged[1]);
    println!("criterion 9 PASS: pr439 regenerates as k=12/15/19 byte-identically; depot-counting flag yields k=20 at size 30");
}

#[test]
fn criterion_10_gap_arithmetic() {
    let rows = [
        (151_568.87, 153_389.90, "-1.19"),
        (2_204.27, 2_291.82, "-3.82"),
        (570.35, 558.59, "2.11"),
    ];
    for (cost, baseline, printed) in rows {
        let gap = solver::gap(cost, baseline).unwrap();
        assert_eq!(format!("{gap:.2}"), printed, "{cost} vs {baseline}");
    }
    println!("criterion 10 PASS: published gap figures reproduce to two decimals");
}
