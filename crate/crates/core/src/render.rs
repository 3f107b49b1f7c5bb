//! ASCII and SVG rendering of traces.
//!
//! Active robots are drawn as arrows pointing along their heading, settled
//! robots as diamonds. The heading shown is the direction of the robot's most
//! recent move; a robot that has not moved yet shows the direction of its
//! first move, or `^` if it never moves.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{Action, Lifecycle, SimulationTrace};
use crate::grid_env::{Cell, Direction, GridError, Region};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("step {t} is out of range 0..={last}")]
    StepOutOfRange { t: u32, last: u32 },
    #[error("frame interval must be at least 1")]
    BadInterval,
    #[error("trace map is invalid: {0}")]
    BadMap(#[from] GridError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    Active(Direction),
    Settled,
}

/// A trace prepared for drawing.
pub struct Frames<'a> {
    trace: &'a SimulationTrace,
    region: Region,
    /// Per robot: `(t, direction)` for each step in which it moved.
    moves: Vec<Vec<(u32, Direction)>>,
}

impl<'a> Frames<'a> {
    pub fn new(trace: &'a SimulationTrace) -> Result<Self, RenderError> {
        let region = Region::from_ascii(&trace.env)?;
        let mut moves: Vec<Vec<(u32, Direction)>> = vec![Vec::new(); trace.robot_count()];
        for step in &trace.steps {
            for (i, r) in step.robots.iter().enumerate() {
                if let Action::Move(d) = r.act {
                    moves[i].push((step.t, d));
                }
            }
        }
        Ok(Frames { trace, region, moves })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn last_t(&self) -> u32 {
        self.trace.last_t()
    }

    fn heading(&self, robot: usize, t: u32) -> Direction {
        let m = &self.moves[robot];
        let k = m.partition_point(|(s, _)| *s <= t);
        if k > 0 {
            m[k - 1].1
        } else {
            m.first().map_or(Direction::Up, |(_, d)| *d)
        }
    }

    /// Robots present at the end of step `t` (`t = 0` is the empty start).
    pub fn robots_at(&self, t: u32) -> Result<Vec<(Cell, Glyph)>, RenderError> {
        let last = self.last_t();
        if t > last {
            return Err(RenderError::StepOutOfRange { t, last });
        }
        if t == 0 {
            return Ok(Vec::new());
        }
        let step = self.trace.step(t).ok_or(RenderError::StepOutOfRange { t, last })?;
        Ok(step
            .robots
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let g = match r.state {
                    Lifecycle::Active => Glyph::Active(self.heading(i, t)),
                    Lifecycle::Settled => Glyph::Settled,
                };
                (r.pos, g)
            })
            .collect())
    }

    pub fn ascii(&self, t: u32) -> Result<String, RenderError> {
        let robots = self.robots_at(t)?;
        let b = self.region.bounds();
        let mut grid: Vec<Vec<char>> = (0..b.height())
            .map(|row| {
                let y = b.max_y - row as i32;
                (b.min_x..=b.max_x)
                    .map(|x| {
                        let c = Cell::new(x, y);
                        if !self.region.contains(c) {
                            '#'
                        } else if c == self.region.door() {
                            'S'
                        } else {
                            '.'
                        }
                    })
                    .collect()
            })
            .collect();
        for (c, g) in robots {
            let row = (b.max_y - c.y) as usize;
            let col = (c.x - b.min_x) as usize;
            grid[row][col] = match g {
                Glyph::Active(d) => d.arrow(),
                Glyph::Settled => 'o',
            };
        }
        let mut out = String::with_capacity(b.area() + b.height());
        for row in grid {
            out.extend(row);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn svg(&self, t: u32) -> Result<String, RenderError> {
        const U: i32 = 20;
        let robots = self.robots_at(t)?;
        let b = self.region.bounds();
        let (w, h) = (b.width() as i32 * U, b.height() as i32 * U);
        let px = |c: Cell| ((c.x - b.min_x) * U, (b.max_y - c.y) * U);
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(s, r#"<title>t={t}</title>"#);
        for c in b.cells() {
            let (x, y) = px(c);
            let fill = if !self.region.contains(c) {
                "#3a3a3a"
            } else if c == self.region.door() {
                "#d8ecff"
            } else {
                "#ffffff"
            };
            let _ = writeln!(s, r##"<rect x="{x}" y="{y}" width="{U}" height="{U}" fill="{fill}" stroke="#bbbbbb" stroke-width="1"/>"##);
        }
        for (c, g) in robots {
            let (x, y) = px(c);
            let (cx, cy) = (x + U / 2, y + U / 2);
            let pts: [(i32, i32); 3];
            match g {
                Glyph::Settled => {
                    let r = U / 2 - 3;
                    let _ = writeln!(
                        s,
                        r##"<polygon points="{},{} {},{} {},{} {},{}" fill="#2f7d32"/>"##,
                        cx,
                        cy - r,
                        cx + r,
                        cy,
                        cx,
                        cy + r,
                        cx - r,
                        cy
                    );
                }
                Glyph::Active(d) => {
                    let r = U / 2 - 3;
                    pts = match d {
                        Direction::Up => [(cx, cy - r), (cx + r, cy + r), (cx - r, cy + r)],
                        Direction::Right => [(cx + r, cy), (cx - r, cy + r), (cx - r, cy - r)],
                        Direction::Down => [(cx, cy + r), (cx - r, cy - r), (cx + r, cy - r)],
                        Direction::Left => [(cx - r, cy), (cx + r, cy - r), (cx + r, cy + r)],
                    };
                    let _ = writeln!(
                        s,
                        r##"<polygon points="{},{} {},{} {},{}" fill="#c62828"/>"##,
                        pts[0].0, pts[0].1, pts[1].0, pts[1].1, pts[2].0, pts[2].1
                    );
                }
            }
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

/// Frame for step `t` of a trace.
pub fn ascii_frame(trace: &SimulationTrace, t: u32) -> Result<String, RenderError> {
    Frames::new(trace)?.ascii(t)
}

/// Steps `every, 2*every, ...` plus the final step if it is not a multiple.
pub fn sampled_steps(last: u32, every: u32) -> Result<Vec<u32>, RenderError> {
    if every == 0 {
        return Err(RenderError::BadInterval);
    }
    let mut ts: Vec<u32> = (1..=last / every).map(|i| i * every).collect();
    if last % every != 0 {
        ts.push(last);
    }
    Ok(ts)
}

/// Write `frame_%06d.svg` files for the sampled steps into `out_dir`.
pub fn svg_frames(trace: &SimulationTrace, every: u32, out_dir: &Path) -> Result<Vec<PathBuf>, RenderError> {
    let frames = Frames::new(trace)?;
    let steps = sampled_steps(frames.last_t(), every)?;
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::with_capacity(steps.len());
    for t in steps {
        let path = out_dir.join(format!("frame_{t:06}.svg"));
        fs::write(&path, frames.svg(t)?)?;
        paths.push(path);
    }
    Ok(paths)
}
