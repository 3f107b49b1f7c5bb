//! `dispersal` command line.
//!
//! Exit codes: 0 success (for `run`: region covered), 1 runtime error,
//! 2 bad arguments or unknown strategy, 3 deadlock, 4 step limit reached,
//! 5 invariant violation or collision.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::{EngineError, Limits, Outcome, SimulationTrace};
use crate::envgen::{g_k, random_simply_connected, rect, EnvError};
use crate::grid_env::{Cell, Region};
use crate::metrics::{compare_runs, compute_metrics, write_csv, CsvRow};
use crate::render::{sampled_steps, svg_frames, Frames};
use crate::strategies::StrategyKind;
use crate::topology::{bfs_distances, corners, geometric_median, hall_tree, halls, is_simply_connected};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEADLOCK: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "dispersal", version, about = "Simulate uniform dispersal of robot swarms on grid regions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a region and write it as an ASCII map.
    Gen(GenArgs),
    /// Run one strategy on a region and print its metrics as a CSV row.
    Run(RunArgs),
    /// Run several strategies over several seeds and summarise.
    Compare(CompareArgs),
    /// Print topology facts about a region.
    Oracle(OracleArgs),
    /// Render a trace as ASCII frames or SVG files.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Shape {
    Rect,
    Random,
    Gk,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub shape: Shape,
    #[arg(long)]
    pub w: Option<i32>,
    #[arg(long)]
    pub h: Option<i32>,
    /// Door as `X,Y` (rectangles only; defaults to 0,0).
    #[arg(long, value_parser = parse_cell)]
    pub door: Option<Cell>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub r: Option<i32>,
    #[arg(long)]
    pub k: Option<i32>,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long)]
    pub strategy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to four steps per cell.
    #[arg(long)]
    pub max_steps: Option<u32>,
    /// Write the full trace as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Validate spacing, follow-the-leader, corner settling and hall turns
    /// after every step.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub env: PathBuf,
    /// Comma-separated strategy names.
    #[arg(long, value_delimiter = ',', default_value = "fcdfs,dflf,bflf")]
    pub strategies: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_steps: Option<u32>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub env: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Ascii,
    Svg,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, value_enum, default_value = "ascii")]
    pub format: Format,
    #[arg(long, default_value_t = 1)]
    pub every: u32,
    #[arg(long, default_value = "frames")]
    pub out: PathBuf,
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let x = x.trim().parse().map_err(|_| format!("bad x coordinate in {s:?}"))?;
    let y = y.trim().parse().map_err(|_| format!("bad y coordinate in {s:?}"))?;
    Ok(Cell::new(x, y))
}

/// Error carrying the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parse `args` (including the program name) and execute.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a, out, err),
        Command::Run(a) => cmd_run(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Render(a) => cmd_render(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_fail(e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_ERROR, e.to_string())
}

fn load_region(path: &Path) -> Result<Region, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", path.display())))?;
    Region::from_ascii(&text).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn env_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn parse_strategy(name: &str) -> Result<StrategyKind, Failure> {
    name.parse().map_err(|e: crate::strategies::UnknownStrategy| Failure::new(EXIT_USAGE, e.to_string()))
}

fn limits(r: &Region, max_steps: Option<u32>) -> Result<Limits, Failure> {
    match max_steps {
        Some(0) => Err(Failure::new(EXIT_USAGE, "--max-steps must be at least 1")),
        Some(m) => Ok(Limits { max_steps: m }),
        None => Ok(Limits::for_region(r)),
    }
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    fn need<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
        v.ok_or_else(|| Failure::new(EXIT_USAGE, format!("missing {flag}")))
    }
    let usage = |e: EnvError| match e {
        EnvError::Grid(g) => Failure::new(EXIT_ERROR, g.to_string()),
        other => Failure::new(EXIT_USAGE, other.to_string()),
    };
    let region = match a.shape {
        Shape::Rect => {
            rect(need(a.w, "--w")?, need(a.h, "--h")?, a.door.unwrap_or(Cell::new(0, 0))).map_err(usage)?
        }
        Shape::Random => {
            let v = need(a.cells, "--cells")?;
            if v == 0 {
                return Err(Failure::new(EXIT_USAGE, "--cells must be at least 1"));
            }
            random_simply_connected(v, a.seed).map_err(usage)?
        }
        Shape::Gk => g_k(need(a.r, "--r")?, need(a.k, "--k")?).map_err(usage)?,
    };
    let info = format!("V={} simply_connected={}", region.len(), is_simply_connected(&region));
    match a.output {
        Some(path) => {
            fs::write(&path, region.to_ascii()).map_err(io_fail)?;
            writeln!(out, "{info}").map_err(io_fail)?;
        }
        None => {
            write!(out, "{}", region.to_ascii()).map_err(io_fail)?;
            writeln!(err, "{info}").map_err(io_fail)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> CmdResult {
    let kind = parse_strategy(&a.strategy)?;
    let region = load_region(&a.env)?;
    let limits = limits(&region, a.max_steps)?;
    let trace = kind.run(&region, a.seed, limits, a.check).map_err(|e| match e {
        EngineError::Invariant { .. } | EngineError::Collision { .. } => Failure::new(EXIT_INVARIANT, e.to_string()),
        other => Failure::new(EXIT_ERROR, other.to_string()),
    })?;
    if let Some(path) = &a.trace {
        fs::write(path, trace.to_json()).map_err(io_fail)?;
    }
    let metrics = compute_metrics(&trace, &region).map_err(io_fail)?;
    let row = CsvRow::new(&env_name(&a.env), &region, kind.name(), a.seed, &Ok(metrics));
    writeln!(out, "{}", row.to_line()).map_err(io_fail)?;
    Ok(match trace.outcome {
        Outcome::Covered(_) => EXIT_OK,
        Outcome::Deadlock(_) => EXIT_DEADLOCK,
        Outcome::StepLimit(_) => EXIT_LIMIT,
    })
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write) -> CmdResult {
    if a.reps == 0 {
        return Err(Failure::new(EXIT_USAGE, "--reps must be at least 1"));
    }
    let kinds: Vec<StrategyKind> = a.strategies.iter().map(|s| parse_strategy(s.trim())).collect::<Result<_, _>>()?;
    let region = load_region(&a.env)?;
    let limits = limits(&region, a.max_steps)?;
    let table = compare_runs(&region, &kinds, a.seed, a.reps, limits);
    let rows = table.csv_rows(&env_name(&a.env), &region);
    if let Some(path) = &a.csv {
        let file = fs::File::create(path).map_err(io_fail)?;
        write_csv(file, &rows).map_err(io_fail)?;
    }
    write!(out, "{}", table.render()).map_err(io_fail)?;
    Ok(EXIT_OK)
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> CmdResult {
    let r = load_region(&a.env)?;
    let simple = is_simply_connected(&r);
    let dist = bfs_distances(&r, r.door()).map_err(io_fail)?;
    let tree = match hall_tree(&r) {
        Ok(t) => t.len().to_string(),
        Err(_) => "n/a".to_string(),
    };
    let median: Vec<String> = geometric_median(&r).iter().map(|c| format!("({},{})", c.x, c.y)).collect();
    let lines = [
        format!("V={}", r.len()),
        format!("door=({},{})", r.door().x, r.door().y),
        format!("simply_connected={simple}"),
        format!("corners={}", corners(&r).len()),
        format!("halls={}", halls(&r).len()),
        format!("hall_tree_components={tree}"),
        format!("sum_distances={}", dist.sum()),
        format!("max_distance={}", dist.max()),
        format!("geometric_median={}", median.join(" ")),
    ];
    for l in lines {
        writeln!(out, "{l}").map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}

fn cmd_render(a: RenderArgs, out: &mut dyn Write) -> CmdResult {
    let text = fs::read_to_string(&a.trace).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", a.trace.display())))?;
    let trace = SimulationTrace::from_json(&text)
        .map_err(|e| Failure::new(EXIT_ERROR, format!("{}: bad trace: {e}", a.trace.display())))?;
    if a.every == 0 {
        return Err(Failure::new(EXIT_USAGE, "--every must be at least 1"));
    }
    match a.format {
        Format::Ascii => {
            let frames = Frames::new(&trace).map_err(io_fail)?;
            for t in sampled_steps(frames.last_t(), a.every).map_err(io_fail)? {
                writeln!(out, "t={t}").map_err(io_fail)?;
                write!(out, "{}", frames.ascii(t).map_err(io_fail)?).map_err(io_fail)?;
            }
        }
        Format::Svg => {
            let files = svg_frames(&trace, a.every, &a.out).map_err(io_fail)?;
            writeln!(out, "wrote {} frames to {}", files.len(), a.out.display()).map_err(io_fail)?;
        }
    }
    Ok(EXIT_OK)
}
