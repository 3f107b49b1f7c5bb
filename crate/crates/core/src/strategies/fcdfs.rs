//! Find-Corner Depth-First Search with an explicit two-step position history.

use crate::engine::{Action, LocalRule, SensorView, StrategyError};
use crate::grid_env::{Direction, Offset};

/// Cell diagonal to a robot whose primary `p` and secondary are both blocked:
/// 135 degrees counter-clockwise from `p`.
pub fn diagonal(p: Direction) -> Offset {
    p.opposite().offset() + p.ccw().offset()
}

/// First unoccupied neighbour scanning clockwise from `Up`.
pub(crate) fn first_free(view: &SensorView) -> Option<Direction> {
    view.free_directions().next()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FcdfsMemory {
    pub primary: Option<Direction>,
    /// Position one step ago, relative to the current one.
    pub prev: Option<Offset>,
    /// Position two steps ago, relative to the current one.
    pub prev_prev: Option<Offset>,
    pub has_moved: bool,
}

impl FcdfsMemory {
    pub fn secondary(&self) -> Option<Direction> {
        self.primary.map(Direction::cw)
    }

    /// Memory after stepping in `d`.
    pub fn after_move(mut self, d: Direction) -> Self {
        let o = d.offset();
        self.prev_prev = self.prev.map(|p| p - o);
        self.prev = Some(-o);
        self.has_moved = true;
        self
    }
}

pub(crate) fn step(m: FcdfsMemory, d: Direction) -> (Action, FcdfsMemory) {
    (Action::Move(d), m.after_move(d))
}

/// The hall branch shared by FCDFS and its variants: primary and secondary
/// are blocked and the cell is not taken for a corner.
pub(crate) fn redirect(view: &SensorView, m: FcdfsMemory) -> Result<(Action, FcdfsMemory), StrategyError> {
    let d = view
        .free_directions()
        .find(|d| Some(d.offset()) != m.prev)
        .ok_or_else(|| StrategyError::NoLegalAction(format!("no unvisited exit from hall, memory {m:?}")))?;
    Ok(step(FcdfsMemory { primary: Some(d), ..m }, d))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Fcdfs;

impl LocalRule for Fcdfs {
    type Memory = FcdfsMemory;

    fn name(&self) -> &'static str {
        "fcdfs"
    }

    fn fresh_memory(&self, _seed: u64) -> FcdfsMemory {
        FcdfsMemory::default()
    }

    fn decide(&self, view: &SensorView, m: &FcdfsMemory) -> Result<(Action, FcdfsMemory), StrategyError> {
        let mut m = *m;
        if view.free_count() == 0 {
            return Ok((Action::Settle, m));
        }
        if !m.has_moved {
            m.primary = first_free(view);
        }
        let p = m.primary.expect("primary set once a neighbour is free");
        if view.free(p) {
            return Ok(step(m, p));
        }
        if view.free(p.cw()) {
            return Ok(step(m, p.cw()));
        }
        // Corner or hall. A dead end has no diagonal.
        if view.free_count() == 1 {
            return Ok((Action::Settle, m));
        }
        let diag = diagonal(p);
        if m.prev_prev == Some(diag) || view.is_free(diag) {
            return Ok((Action::Settle, m));
        }
        redirect(view, m)
    }

    fn primary(&self, m: &FcdfsMemory) -> Option<Direction> {
        m.primary
    }
}
