//! Breadth-first leader-follower baseline.
//!
//! The swarm shares a blackboard holding the explored tree (rooted at the
//! door) and the frontier of sensed but unexplored cells. Robots only ever
//! move down the tree. A robot explores a frontier cell owned by its own
//! cell when it can; otherwise it descends into a child subtree that still
//! lacks robots, preferring the one with open space closest to it. A robot
//! settles once its cell owns no frontier and every subtree below it is
//! full. Robots that cannot do any of this wait, which counts as travel but
//! not as a move.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Action, Controller, RobotId, StrategyError, Swarm};
use crate::grid_env::{Cell, Direction};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub parent: Option<Cell>,
    pub children: Vec<Cell>,
    pub settled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Blackboard {
    pub nodes: BTreeMap<Cell, Node>,
    /// Unexplored cell -> explored cell that discovered it.
    pub frontier: BTreeMap<Cell, Cell>,
}

#[derive(Default)]
struct Tally {
    demand: usize,
    supply: usize,
    unsettled: usize,
    open_dist: u32,
}

impl Blackboard {
    fn root_at(&mut self, door: Cell) {
        if self.nodes.is_empty() {
            self.nodes.insert(door, Node { parent: None, children: Vec::new(), settled: false });
        }
    }

    /// Per-node subtree totals, computed bottom-up.
    fn tally(&self, root: Cell, robots: &HashMap<Cell, RobotId>) -> HashMap<Cell, Tally> {
        let mut owned: HashMap<Cell, usize> = HashMap::new();
        for owner in self.frontier.values() {
            *owned.entry(*owner).or_default() += 1;
        }
        let mut order = vec![root];
        let mut i = 0;
        while i < order.len() {
            order.extend(self.nodes[&order[i]].children.iter().copied());
            i += 1;
        }
        let mut out: HashMap<Cell, Tally> = HashMap::with_capacity(order.len());
        for &c in order.iter().rev() {
            let node = &self.nodes[&c];
            let own_frontier = owned.get(&c).copied().unwrap_or(0);
            let unsettled_here = usize::from(!node.settled);
            let occupied = robots.contains_key(&c);
            let mut t = Tally {
                demand: unsettled_here + own_frontier,
                supply: usize::from(occupied && !node.settled),
                unsettled: unsettled_here + own_frontier,
                open_dist: if own_frontier > 0 || (!node.settled && !occupied) { 0 } else { u32::MAX },
            };
            for ch in &node.children {
                let sub = &out[ch];
                t.demand += sub.demand;
                t.supply += sub.supply;
                t.unsettled += sub.unsettled;
                t.open_dist = t.open_dist.min(sub.open_dist.saturating_add(1));
            }
            out.insert(c, t);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Bflf;

impl Controller for Bflf {
    type Memory = u64;
    type Shared = Blackboard;

    fn name(&self) -> &'static str {
        "bflf"
    }

    fn fresh_memory(&self, seed: u64) -> u64 {
        seed
    }

    fn decide(&self, swarm: &Swarm<'_, u64>, board: &mut Blackboard) -> Result<Vec<(Action, u64)>, (RobotId, StrategyError)> {
        board.root_at(swarm.door);
        for a in &swarm.agents {
            for d in a.view.free_directions() {
                let c = a.pos.step(d);
                if !board.nodes.contains_key(&c) {
                    board.frontier.entry(c).or_insert(a.pos);
                }
            }
        }
        let robots: HashMap<Cell, RobotId> = swarm.agents.iter().map(|a| (a.pos, a.id)).collect();
        let tally = board.tally(swarm.door, &robots);
        let mut incoming: HashMap<Cell, usize> = HashMap::new();
        let mut out = Vec::with_capacity(swarm.agents.len());
        let mut explored = Vec::new();
        let mut settled = Vec::new();

        for a in &swarm.agents {
            let node = board.nodes.get(&a.pos).ok_or_else(|| {
                (a.id, StrategyError::NoLegalAction(format!("robot at {} is outside the explored tree", a.pos)))
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(*a.memory);
            let owned: Vec<Direction> = Direction::ALL
                .into_iter()
                .filter(|d| board.frontier.get(&a.pos.step(*d)) == Some(&a.pos) && a.view.free(*d))
                .collect();
            let action = if !owned.is_empty() {
                let d = owned[rng.gen_range(0..owned.len())];
                explored.push((a.pos.step(d), a.pos));
                Action::Move(d)
            } else {
                let deficit: Vec<Cell> = node
                    .children
                    .iter()
                    .copied()
                    .filter(|ch| {
                        let t = &tally[ch];
                        t.demand > t.supply + incoming.get(ch).copied().unwrap_or(0)
                    })
                    .filter(|ch| a.view.free(Direction::from_offset(*ch - a.pos).expect("child is adjacent")))
                    .collect();
                if let Some(best) = deficit.iter().map(|ch| tally[ch].open_dist).min() {
                    let ties: Vec<Cell> = deficit.into_iter().filter(|ch| tally[ch].open_dist == best).collect();
                    let ch = ties[rng.gen_range(0..ties.len())];
                    *incoming.entry(ch).or_default() += 1;
                    Action::Move(Direction::from_offset(ch - a.pos).expect("child is adjacent"))
                } else {
                    let owns_frontier = board.frontier.values().any(|o| *o == a.pos);
                    let below_full = node.children.iter().all(|ch| tally[ch].unsettled == 0);
                    if !owns_frontier && below_full {
                        settled.push(a.pos);
                        Action::Settle
                    } else {
                        Action::Stay
                    }
                }
            };
            out.push((action, rng.next_u64()));
        }

        for (cell, parent) in explored {
            board.frontier.remove(&cell);
            board.nodes.insert(cell, Node { parent: Some(parent), children: Vec::new(), settled: false });
            board.nodes.get_mut(&parent).expect("parent explored").children.push(cell);
        }
        for c in settled {
            board.nodes.get_mut(&c).expect("settled on explored cell").settled = true;
        }
        Ok(out)
    }
}
