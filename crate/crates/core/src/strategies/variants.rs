//! Two FCDFS variants: a compass-free one that starts in a random direction
//! and settles at the first corner it finds, and a boundary follower.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Action, LocalRule, SensorView, StrategyError};
use crate::grid_env::Direction;

use super::fcdfs::{diagonal, first_free, redirect, step, FcdfsMemory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandCornerMemory {
    pub base: FcdfsMemory,
    /// Drawn once at spawn; picks the initial heading.
    pub draw: u32,
}

/// Random initial heading; settles at any detected corner once under way.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandCorner;

/// True when the free neighbours form a corner: a dead end, or an L whose
/// diagonal is free or is where the robot stood two steps ago.
fn at_corner(view: &SensorView, m: &FcdfsMemory) -> bool {
    let free: Vec<Direction> = view.free_directions().collect();
    match free.as_slice() {
        [_] => true,
        [a, b] if *b != a.opposite() => {
            let diag = a.offset() + b.offset();
            view.is_free(diag) || m.prev_prev == Some(diag)
        }
        _ => false,
    }
}

impl LocalRule for RandCorner {
    type Memory = RandCornerMemory;

    fn name(&self) -> &'static str {
        "rand-corner"
    }

    fn fresh_memory(&self, seed: u64) -> RandCornerMemory {
        let draw = ChaCha8Rng::seed_from_u64(seed).gen::<u32>();
        RandCornerMemory { base: FcdfsMemory::default(), draw }
    }

    fn decide(&self, view: &SensorView, m: &RandCornerMemory) -> Result<(Action, RandCornerMemory), StrategyError> {
        let mut base = m.base;
        let wrap = |(a, base)| Ok((a, RandCornerMemory { base, draw: m.draw }));
        if view.free_count() == 0 {
            return wrap((Action::Settle, base));
        }
        if !base.has_moved {
            let free: Vec<Direction> = view.free_directions().collect();
            base.primary = Some(free[m.draw as usize % free.len()]);
        } else if at_corner(view, &base) {
            return wrap((Action::Settle, base));
        }
        let p = base.primary.expect("primary set once a neighbour is free");
        if view.free(p) {
            return wrap(step(base, p));
        }
        if view.free(p.cw()) {
            return wrap(step(base, p.cw()));
        }
        redirect(view, base).and_then(wrap)
    }

    fn primary(&self, m: &RandCornerMemory) -> Option<Direction> {
        m.base.primary
    }
}

/// Keeps a wall on its left where it can: goes straight along a wall, turns
/// right (secondary) as soon as the wall on the left ends, and otherwise
/// behaves like FCDFS.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeftHand;

impl LocalRule for LeftHand {
    type Memory = FcdfsMemory;

    fn name(&self) -> &'static str {
        "left-hand"
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
        let s = p.cw();
        if view.free(p) && !view.free(p.ccw()) {
            return Ok(step(m, p));
        }
        if view.free(s) {
            return Ok(step(m, s));
        }
        if view.free(p) {
            return Ok(step(m, p));
        }
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
