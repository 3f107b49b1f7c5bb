//! Acceptance suite. Each test prints one `PASS`/`FAIL` line.

use std::collections::HashSet;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;

use dispersal::engine::{Action, Limits, Outcome};
use dispersal::envgen::{g_k, random_simply_connected, rect};
use dispersal::grid_env::{Cell, Region};
use dispersal::metrics::{compute_metrics, RunMetrics};
use dispersal::strategies::StrategyKind;
use dispersal::topology::{
    articulation_points, bfs_distances, bfs_distances_with, corners, halls, is_simply_connected,
    is_simply_connected_with, sum_distances,
};

const SUITE_SIZE: u64 = 200;

/// Seeded random simply connected regions with 10 to 400 cells.
fn suite() -> &'static [Region] {
    static SUITE: OnceLock<Vec<Region>> = OnceLock::new();
    SUITE.get_or_init(|| {
        (0..SUITE_SIZE)
            .into_par_iter()
            .map(|seed| {
                let v = 10 + (seed as usize * 97) % 391;
                random_simply_connected(v, 1000 + seed).expect("generator")
            })
            .collect()
    })
}

fn report(n: u32, name: &str, failures: &[String], detail: &str) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {n} [{status}] {name}: {detail}");
    for f in failures.iter().take(5) {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "criterion {n} failed: {} problem(s)", failures.len());
}

fn run_metrics(k: StrategyKind, r: &Region, seed: u64, check: bool) -> Result<(dispersal::SimulationTrace, RunMetrics), String> {
    let trace = k.run(r, seed, Limits::for_region(r), check).map_err(|e| e.to_string())?;
    let m = compute_metrics(&trace, r).map_err(|e| e.to_string())?;
    Ok((trace, m))
}

/// Makespan `2V-1` and total travel equal to the distance sum.
fn optimal_run(k: StrategyKind, r: &Region, seed: u64) -> Result<RunMetrics, String> {
    let (_, m) = run_metrics(k, r, seed, false)?;
    let v = r.len() as u32;
    if m.outcome != Outcome::Covered(2 * v - 1) {
        return Err(format!("outcome {:?}, expected covered at {}", m.outcome, 2 * v - 1));
    }
    if m.total_travel != m.optimum {
        return Err(format!("total travel {} vs optimum {}", m.total_travel, m.optimum));
    }
    Ok(m)
}

#[test]
fn criterion_1_square_grid_reference_row() {
    let start = Instant::now();
    let r = rect(30, 30, Cell::new(13, 13)).unwrap();
    let mut failures = Vec::new();
    let oracle = sum_distances(&r, r.door()).unwrap();
    if oracle != 13620 {
        failures.push(format!("distance sum from the door is {oracle}, not 13620"));
    }
    let (_, m) = run_metrics(StrategyKind::Fcdfs, &r, 0, false).unwrap();
    let elapsed = start.elapsed();
    if m.total_travel != 13620 || m.max_travel != 32 || m.makespan != Some(1799) {
        failures.push(format!("got total {} max {} makespan {:?}", m.total_travel, m.max_travel, m.makespan));
    }
    if elapsed.as_secs_f64() >= 1.0 {
        failures.push(format!("took {elapsed:?}"));
    }
    report(
        1,
        "30x30 door (13,13)",
        &failures,
        &format!("total {} max {} makespan {:?} in {:.3}s", m.total_travel, m.max_travel, m.makespan, elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_2_optimality_suite() {
    let start = Instant::now();
    let failures: Vec<String> = suite()
        .par_iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let check = || -> Result<(), String> {
                let (trace, m) = run_metrics(StrategyKind::Fcdfs, r, 0, false)?;
                let v = r.len() as u32;
                if m.outcome != Outcome::Covered(2 * v - 1) {
                    return Err(format!("outcome {:?}", m.outcome));
                }
                if m.robots.len() != r.len() {
                    return Err(format!("{} robots for {} cells", m.robots.len(), r.len()));
                }
                if m.total_travel != m.optimum {
                    return Err(format!("total {} optimum {}", m.total_travel, m.optimum));
                }
                let dist = bfs_distances(r, r.door()).unwrap();
                let last = trace.steps.last().unwrap();
                for (t, rec) in m.robots.iter().zip(&last.robots) {
                    let d = u64::from(dist.get(rec.pos).unwrap());
                    if t.travel != d {
                        return Err(format!("robot {} travelled {} to a cell at distance {}", t.id, t.travel, d));
                    }
                    if t.stays != 0 {
                        return Err(format!("robot {} paused {} times", t.id, t.stays));
                    }
                }
                for s in &trace.steps {
                    let cells: HashSet<Cell> = s.robots.iter().map(|r| r.pos).collect();
                    if cells.len() != s.robots.len() {
                        return Err(format!("shared cell at step {}", s.t));
                    }
                }
                Ok(())
            };
            check().err().map(|e| format!("region {i} (V={}): {e}", r.len()))
        })
        .collect();
    let elapsed = start.elapsed();
    let mut failures = failures;
    if elapsed.as_secs() >= 60 {
        failures.push(format!("took {elapsed:?}"));
    }
    report(2, "optimal travel and makespan", &failures, &format!("{} regions in {:.2}s", suite().len(), elapsed.as_secs_f64()));
}

#[test]
fn criterion_3_five_bit_equivalence() {
    let failures: Vec<String> = suite()
        .par_iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let a = StrategyKind::Fcdfs.run(r, 0, Limits::for_region(r), false).map_err(|e| e.to_string());
            let b = StrategyKind::Fcdfs5.run(r, 0, Limits::for_region(r), false).map_err(|e| e.to_string());
            match (a, b) {
                (Ok(a), Ok(b)) if a.steps == b.steps && a.outcome == b.outcome && a.env == b.env => None,
                (Ok(a), Ok(b)) => {
                    let t = a.steps.iter().zip(&b.steps).find(|(x, y)| x != y).map(|(x, _)| x.t);
                    Some(format!("region {i}: traces diverge at step {t:?}"))
                }
                (a, b) => Some(format!("region {i}: {:?} / {:?}", a.err(), b.err())),
            }
        })
        .collect();
    report(3, "memory and 5-bit forms agree", &failures, &format!("{} regions compared", suite().len()));
}

#[test]
fn criterion_4_variants_are_optimal() {
    let rand_fail: Vec<String> = suite()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, r)| {
            (0..10u64).filter_map(move |seed| {
                optimal_run(StrategyKind::RandCorner, r, seed)
                    .err()
                    .map(|e| format!("rand-corner region {i} (V={}) seed {seed}: {e}", r.len()))
            })
        })
        .collect();
    let left_fail: Vec<String> = suite()
        .par_iter()
        .enumerate()
        .filter_map(|(i, r)| {
            optimal_run(StrategyKind::LeftHand, r, 0).err().map(|e| format!("left-hand region {i} (V={}): {e}", r.len()))
        })
        .collect();
    let detail = format!(
        "rand-corner {} of {} runs optimal, left-hand {} of {} optimal",
        suite().len() * 10 - rand_fail.len(),
        suite().len() * 10,
        suite().len() - left_fail.len(),
        suite().len()
    );
    let collisions = rand_fail.iter().filter(|f| f.contains("collision")).count();
    let detail = format!("{detail}; {collisions} rand-corner counterexample(s) are collisions");
    let failures: Vec<String> = rand_fail.into_iter().chain(left_fail).collect();
    let archive = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("criterion4_counterexamples.txt");
    std::fs::write(&archive, failures.join("\n") + "\n").expect("archive counterexamples");
    let detail = format!("{detail}; archived in {}", archive.display());
    report(4, "variants match makespan and travel", &failures, &detail);
}

#[test]
fn criterion_5_topology_facts() {
    let small: Vec<&Region> = suite().iter().filter(|r| r.len() <= 60).collect();
    let mut failures: Vec<String> = suite()
        .par_iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let cut = articulation_points(r);
            halls(r).into_iter().find(|h| !cut.contains(h)).map(|h| format!("region {i}: hall {h} is not a cut vertex"))
        })
        .collect();
    let corner_removal: Vec<String> = small
        .par_iter()
        .flat_map_iter(|r| {
            let r = *r;
            corners(r).into_iter().filter(|_| r.len() > 1).filter_map(move |c| {
                let rest = |x: Cell| x != c && r.contains(x);
                if !is_simply_connected_with(r.bounds(), rest) {
                    return Some(format!("removing corner {c} leaves a hole"));
                }
                for &u in r.cells().iter().filter(|u| **u != c) {
                    let full = bfs_distances(r, u).unwrap();
                    let cut = bfs_distances_with(r.bounds(), rest, u);
                    for &w in r.cells().iter().filter(|w| **w != c) {
                        if full.get(w) != cut.get(w) {
                            return Some(format!("removing corner {c} changes dist({u},{w})"));
                        }
                    }
                }
                None
            })
        })
        .collect();
    failures.extend(corner_removal);
    report(
        5,
        "halls are cut vertices; corner removal keeps distances",
        &failures,
        &format!("{} regions, {} with V <= 60 checked pairwise", suite().len(), small.len()),
    );
    assert!(!small.is_empty());
}

#[test]
fn criterion_6_runtime_invariants() {
    let failures: Vec<String> = suite()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, r)| {
            [StrategyKind::Fcdfs, StrategyKind::Fcdfs5]
                .into_iter()
                .filter_map(move |k| k.run(r, 0, Limits::for_region(r), true).err().map(|e| format!("{k} region {i}: {e}")))
        })
        .collect();
    report(6, "spacing, follow-the-leader, corner settles, hall turns", &failures, &format!("{} checked runs", 2 * suite().len()));
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = points.iter().map(|(x, y)| (x.ln() - mx) * (y.ln() - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x.ln() - mx).powi(2)).sum();
    num / den
}

#[test]
fn criterion_7_scaling() {
    let start = Instant::now();
    let sizes = [8, 16, 32];
    let moves = |k: StrategyKind| -> Vec<(f64, f64)> {
        sizes
            .par_iter()
            .map(|&n| {
                let r = rect(n, n, Cell::new(0, 0)).unwrap();
                let (_, m) = run_metrics(k, &r, 0, false).unwrap();
                assert!(m.outcome.is_covered(), "{k} on {n}x{n}: {:?}", m.outcome);
                (n as f64, m.total_moves as f64)
            })
            .collect()
    };
    let f = slope(&moves(StrategyKind::Fcdfs));
    let d = slope(&moves(StrategyKind::Dflf));
    let mut failures = Vec::new();
    if (f - 3.0).abs() > 0.3 {
        failures.push(format!("fcdfs slope {f:.3}"));
    }
    if (d - 4.0).abs() > 0.4 {
        failures.push(format!("dflf slope {d:.3}"));
    }
    if start.elapsed().as_secs() >= 120 {
        failures.push(format!("took {:?}", start.elapsed()));
    }
    report(7, "log-log slope of total moves", &failures, &format!("fcdfs {f:.3}, dflf {d:.3}"));
}

#[test]
fn criterion_8_deadlocks() {
    let ring = Region::from_ascii("...\n.#.\nS..").unwrap();
    let comb = g_k(1, 5).unwrap();
    let mut failures = Vec::new();
    let mut outcomes = Vec::new();
    for (name, r) in [("ring", &ring), ("g_k(1,5)", &comb)] {
        assert!(!is_simply_connected(r));
        match StrategyKind::Fcdfs.run(r, 0, Limits::for_region(r), false) {
            Ok(t) => {
                outcomes.push(format!("{name} {}@{}", t.outcome.kind(), t.outcome.t()));
                if !matches!(t.outcome, Outcome::Deadlock(_)) {
                    failures.push(format!("{name}: {:?}", t.outcome));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    report(8, "deadlock detected on regions with holes", &failures, &outcomes.join(", "));
}

#[test]
fn criterion_9_baseline_ordering() {
    let r = rect(30, 30, Cell::new(13, 13)).unwrap();
    let mean_moves = |k: StrategyKind| -> Result<f64, String> {
        let runs: Vec<Result<RunMetrics, String>> =
            (0..5u64).into_par_iter().map(|s| run_metrics(k, &r, s, false).map(|(_, m)| m)).collect();
        let mut total = 0.0;
        for m in runs {
            let m = m?;
            if !m.outcome.is_covered() {
                return Err(format!("{k}: {:?}", m.outcome));
            }
            total += m.total_moves as f64;
        }
        Ok(total / 5.0)
    };
    let mut failures = Vec::new();
    let (d, b, f) = (mean_moves(StrategyKind::Dflf), mean_moves(StrategyKind::Bflf), mean_moves(StrategyKind::Fcdfs));
    let detail = format!("dflf {d:?}, bflf {b:?}, fcdfs {f:?}");
    match (d, b, f) {
        (Ok(d), Ok(b), Ok(f)) if d > b && b > f => {}
        _ => failures.push("ordering dflf > bflf > fcdfs does not hold".to_string()),
    }
    report(9, "mean total moves over 5 seeds", &failures, &detail);
}

#[test]
fn stays_are_excluded_from_moves() {
    // Sanity: under the baselines, moves never exceed travel.
    let r = rect(12, 12, Cell::new(5, 5)).unwrap();
    for k in [StrategyKind::Bflf, StrategyKind::Dflf] {
        let (trace, m) = run_metrics(k, &r, 1, false).unwrap();
        assert!(m.total_moves <= m.total_travel);
        let stays = trace.steps.iter().flat_map(|s| &s.robots).filter(|r| r.act == Action::Stay).count();
        assert!(stays as u64 >= m.total_travel - m.total_moves);
    }
}
