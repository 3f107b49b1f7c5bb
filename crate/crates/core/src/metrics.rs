//! Travel and makespan metrics, optimum comparison and multi-run tables.

use std::fmt::Write as _;
use std::io;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{Action, Lifecycle, Limits, Outcome, RobotId, SimulationTrace};
use crate::grid_env::{Cell, Region};
use crate::strategies::StrategyKind;
use crate::topology::sum_distances;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("trace was recorded on a different region")]
    TraceRegionMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobotTally {
    pub id: RobotId,
    pub travel: u64,
    pub moves: u64,
    pub stays: u64,
    /// Where the robot settled, if it did.
    pub settled_at: Option<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetrics {
    pub v: usize,
    pub makespan: Option<u32>,
    pub total_travel: u64,
    pub max_travel: u64,
    pub total_moves: u64,
    pub max_moves: u64,
    pub optimum: u64,
    pub optimal: bool,
    pub outcome: Outcome,
    pub robots: Vec<RobotTally>,
}

/// Per-robot travel counts steps that begin and end with the robot active,
/// so a robot's spawn step and settle step are excluded.
pub fn compute_metrics(trace: &SimulationTrace, r: &Region) -> Result<RunMetrics, MetricsError> {
    if trace.env != r.to_ascii() {
        return Err(MetricsError::TraceRegionMismatch);
    }
    let mut robots: Vec<RobotTally> = Vec::new();
    let mut before: &[crate::engine::RobotRecord] = &[];
    for step in &trace.steps {
        for (i, now) in step.robots.iter().enumerate() {
            if i == robots.len() {
                robots.push(RobotTally { id: now.id, travel: 0, moves: 0, stays: 0, settled_at: None });
            }
            let tally = &mut robots[i];
            if let Some(prev) = before.get(i) {
                if prev.state == Lifecycle::Active && now.state == Lifecycle::Active {
                    tally.travel += 1;
                }
                if prev.pos != now.pos {
                    tally.moves += 1;
                }
                if prev.state == Lifecycle::Active && now.act == Action::Stay {
                    tally.stays += 1;
                }
            }
            if now.state == Lifecycle::Settled {
                tally.settled_at = Some(now.pos);
            }
        }
        before = &step.robots;
    }
    let optimum = sum_distances(r, r.door()).map_err(|_| MetricsError::TraceRegionMismatch)?;
    let total_travel = robots.iter().map(|t| t.travel).sum();
    Ok(RunMetrics {
        v: r.len(),
        makespan: trace.outcome.is_covered().then(|| trace.outcome.t()),
        total_travel,
        max_travel: robots.iter().map(|t| t.travel).max().unwrap_or(0),
        total_moves: robots.iter().map(|t| t.moves).sum(),
        max_moves: robots.iter().map(|t| t.moves).max().unwrap_or(0),
        optimum,
        optimal: trace.outcome.is_covered() && total_travel == optimum,
        outcome: trace.outcome,
        robots,
    })
}

/// One CSV line per run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CsvRow {
    pub env: String,
    pub door_x: i32,
    pub door_y: i32,
    #[serde(rename = "V")]
    pub v: usize,
    pub strategy: String,
    pub seed: u64,
    pub outcome: String,
    pub makespan: Option<u32>,
    pub total_travel: Option<u64>,
    pub max_travel: Option<u64>,
    pub total_moves: Option<u64>,
    pub max_moves: Option<u64>,
    pub optimum: Option<u64>,
    pub optimal: Option<bool>,
}

pub const CSV_HEADER: &str =
    "env,door_x,door_y,V,strategy,seed,outcome,makespan,total_travel,max_travel,total_moves,max_moves,optimum,optimal";

impl CsvRow {
    pub fn new(env: &str, r: &Region, strategy: &str, seed: u64, result: &Result<RunMetrics, String>) -> CsvRow {
        let m = result.as_ref().ok();
        CsvRow {
            env: env.to_string(),
            door_x: r.door().x,
            door_y: r.door().y,
            v: r.len(),
            strategy: strategy.to_string(),
            seed,
            outcome: match result {
                Ok(m) => m.outcome.kind().to_string(),
                Err(e) => format!("error: {e}"),
            },
            makespan: m.and_then(|m| m.makespan),
            total_travel: m.map(|m| m.total_travel),
            max_travel: m.map(|m| m.max_travel),
            total_moves: m.map(|m| m.total_moves),
            max_moves: m.map(|m| m.max_moves),
            optimum: m.map(|m| m.optimum),
            optimal: m.map(|m| m.optimal),
        }
    }

    /// The row as a single CSV line without a trailing newline.
    pub fn to_line(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.serialize(self).expect("row serializes");
        let bytes = w.into_inner().expect("in-memory writer");
        String::from_utf8(bytes).expect("utf-8").trim_end().to_string()
    }
}

pub fn write_csv<W: io::Write>(out: W, rows: &[CsvRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub strategy: StrategyKind,
    pub seed: u64,
    pub result: Result<RunMetrics, String>,
}

/// Mean, minimum and maximum over successful runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub min: u64,
    pub max: u64,
}

impl Stat {
    fn of(values: impl Iterator<Item = u64>) -> Option<Stat> {
        let v: Vec<u64> = values.collect();
        if v.is_empty() {
            return None;
        }
        Some(Stat {
            mean: v.iter().sum::<u64>() as f64 / v.len() as f64,
            min: *v.iter().min().unwrap(),
            max: *v.iter().max().unwrap(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    pub runs: usize,
    pub covered: usize,
    pub total_travel: Option<Stat>,
    pub max_travel: Option<Stat>,
    pub total_moves: Option<Stat>,
    pub max_moves: Option<Stat>,
    pub makespan: Option<Stat>,
}

fn pair(total: Option<Stat>, max: Option<Stat>) -> String {
    match (total, max) {
        (Some(t), Some(m)) => format!("{} ({})", fmt_mean(t.mean), fmt_mean(m.mean)),
        _ => "-".to_string(),
    }
}

fn fmt_mean(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.1}")
    }
}

impl StrategySummary {
    /// Mean total travel and mean maximal travel as `total (max)`.
    pub fn travel_cell(&self) -> String {
        pair(self.total_travel, self.max_travel)
    }

    /// Same for moves, which leave out pauses.
    pub fn moves_cell(&self) -> String {
        pair(self.total_moves, self.max_moves)
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub records: Vec<RunRecord>,
    pub summaries: Vec<StrategySummary>,
}

impl ComparisonTable {
    pub fn summary(&self, k: StrategyKind) -> Option<&StrategySummary> {
        self.summaries.iter().find(|s| s.strategy == k)
    }

    pub fn csv_rows(&self, env: &str, r: &Region) -> Vec<CsvRow> {
        self.records.iter().map(|rec| CsvRow::new(env, r, rec.strategy.name(), rec.seed, &rec.result)).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>5} {:>8} {:>22} {:>22} {:>10}",
            "strategy", "runs", "covered", "travel total (max)", "moves total (max)", "makespan"
        );
        for s in &self.summaries {
            let makespan = s.makespan.map_or("-".to_string(), |m| fmt_mean(m.mean));
            let _ = writeln!(
                out,
                "{:<12} {:>5} {:>8} {:>22} {:>22} {:>10}",
                s.strategy.name(),
                s.runs,
                s.covered,
                s.travel_cell(),
                s.moves_cell(),
                makespan
            );
        }
        out
    }
}

/// Run every strategy with seeds `seed .. seed + reps`, in parallel. Failed
/// runs are kept as records with an error message.
pub fn compare_runs(r: &Region, strategies: &[StrategyKind], seed: u64, reps: usize, limits: Limits) -> ComparisonTable {
    let jobs: Vec<(StrategyKind, u64)> =
        strategies.iter().flat_map(|k| (0..reps as u64).map(move |i| (*k, seed.wrapping_add(i)))).collect();
    let mut records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(strategy, seed)| {
            let result = strategy
                .run(r, seed, limits, false)
                .map_err(|e| e.to_string())
                .and_then(|t| compute_metrics(&t, r).map_err(|e| e.to_string()));
            RunRecord { strategy, seed, result }
        })
        .collect();
    records.sort_by_key(|rec| (strategies.iter().position(|k| *k == rec.strategy), rec.seed));

    let summaries = strategies
        .iter()
        .map(|&k| {
            let runs: Vec<&RunMetrics> =
                records.iter().filter(|r| r.strategy == k).filter_map(|r| r.result.as_ref().ok()).collect();
            let covered: Vec<&&RunMetrics> = runs.iter().filter(|m| m.outcome.is_covered()).collect();
            StrategySummary {
                strategy: k,
                runs: records.iter().filter(|r| r.strategy == k).count(),
                covered: covered.len(),
                total_travel: Stat::of(covered.iter().map(|m| m.total_travel)),
                max_travel: Stat::of(covered.iter().map(|m| m.max_travel)),
                total_moves: Stat::of(covered.iter().map(|m| m.total_moves)),
                max_moves: Stat::of(covered.iter().map(|m| m.max_moves)),
                makespan: Stat::of(covered.iter().filter_map(|m| m.makespan.map(u64::from))),
            }
        })
        .collect();
    ComparisonTable { records, summaries }
}
