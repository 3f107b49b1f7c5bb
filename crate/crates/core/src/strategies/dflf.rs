//! Depth-first leader-follower baseline.
//!
//! The swarm shares one trail: the path from the door to the leader. The
//! leader extends the trail into an unoccupied cell off the trail, going
//! straight when it can and choosing at random otherwise; with nowhere to go
//! it settles and the trail is cut back by one cell. Every other robot walks
//! along the trail.

use std::collections::HashMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Action, Controller, RobotId, StrategyError, Swarm};
use crate::grid_env::{Cell, Direction};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Trail {
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Dflf;

impl Controller for Dflf {
    /// Per-robot tie-break generator state.
    type Memory = u64;
    type Shared = Trail;

    fn name(&self) -> &'static str {
        "dflf"
    }

    fn fresh_memory(&self, seed: u64) -> u64 {
        seed
    }

    fn decide(&self, swarm: &Swarm<'_, u64>, trail: &mut Trail) -> Result<Vec<(Action, u64)>, (RobotId, StrategyError)> {
        if trail.cells.is_empty() {
            trail.cells.push(swarm.door);
        }
        let index: HashMap<Cell, usize> = trail.cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let last = trail.cells.len() - 1;
        let mut out = Vec::with_capacity(swarm.agents.len());
        let mut extend = None;
        let mut pop = false;

        for a in &swarm.agents {
            let i = *index
                .get(&a.pos)
                .ok_or_else(|| (a.id, StrategyError::NoLegalAction(format!("robot at {} is off the trail", a.pos))))?;
            if i < last {
                let d = Direction::from_offset(trail.cells[i + 1] - a.pos).expect("trail is a lattice path");
                out.push((if a.view.free(d) { Action::Move(d) } else { Action::Stay }, *a.memory));
                continue;
            }
            let heading = (i > 0).then(|| Direction::from_offset(a.pos - trail.cells[i - 1])).flatten();
            let options: Vec<Direction> =
                a.view.free_directions().filter(|d| !index.contains_key(&a.pos.step(*d))).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(*a.memory);
            let choice = match heading {
                Some(h) if options.contains(&h) => Some(h),
                _ if options.is_empty() => None,
                _ => Some(options[rng.gen_range(0..options.len())]),
            };
            let memory = rng.next_u64();
            match choice {
                Some(d) => {
                    extend = Some(a.pos.step(d));
                    out.push((Action::Move(d), memory));
                }
                None => {
                    pop = true;
                    out.push((Action::Settle, memory));
                }
            }
        }

        if let Some(c) = extend {
            trail.cells.push(c);
        } else if pop {
            trail.cells.pop();
        }
        Ok(out)
    }
}
