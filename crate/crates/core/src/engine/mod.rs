//! Synchronous Look-Compute-Move scheduler.
//!
//! Every step takes an occupancy snapshot, asks the controller for one action
//! per active robot, applies all moves at once, then spawns a robot at the
//! door if the door was free in the snapshot. A move is legal only if its
//! target was free in the snapshot and no other robot targets the same cell.
//!
//! Runs end when every cell is occupied, when the whole configuration repeats
//! (deadlock), or at the step limit.

pub mod check;
pub mod trace;

use std::collections::HashSet;
use std::fmt::Debug;
use std::hash::Hash;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid_env::{Bounds, Cell, Direction, Offset, Region};

pub use check::InvariantChecker;
pub use trace::{Action, Lifecycle, Outcome, RobotId, RobotRecord, SimulationTrace, StepRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("no legal action: {0}")]
    NoLegalAction(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("collision at step {t}: {detail}")]
    Collision { t: u32, detail: String },
    #[error("strategy error at step {t} for robot {robot}: {source}")]
    Strategy { t: u32, robot: RobotId, source: StrategyError },
    #[error("controller returned {got} decisions for {expected} robots at step {t}")]
    DecisionCount { t: u32, expected: usize, got: usize },
    #[error("invariant violated at step {t}: {message}")]
    Invariant { t: u32, message: String },
    #[error("simulation already finished")]
    Finished,
}

/// Occupancy of the twelve cells within Manhattan distance 2 of a robot.
///
/// Walls and robots, active or settled, all read as occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SensorView {
    occupied: u16,
}

impl SensorView {
    pub const OFFSETS: [Offset; 12] = [
        Offset::new(0, 1),
        Offset::new(1, 0),
        Offset::new(0, -1),
        Offset::new(-1, 0),
        Offset::new(0, 2),
        Offset::new(1, 1),
        Offset::new(2, 0),
        Offset::new(1, -1),
        Offset::new(0, -2),
        Offset::new(-1, -1),
        Offset::new(-2, 0),
        Offset::new(-1, 1),
    ];

    pub fn from_fn(mut occupied: impl FnMut(Offset) -> bool) -> Self {
        let mut bits = 0u16;
        for (i, o) in Self::OFFSETS.iter().enumerate() {
            if occupied(*o) {
                bits |= 1 << i;
            }
        }
        SensorView { occupied: bits }
    }

    fn slot(o: Offset) -> usize {
        Self::OFFSETS
            .iter()
            .position(|x| *x == o)
            .unwrap_or_else(|| panic!("offset {o:?} is outside the sensing range"))
    }

    /// Panics for offsets outside Manhattan distance 1..=2.
    pub fn is_occupied(&self, o: Offset) -> bool {
        self.occupied & (1 << Self::slot(o)) != 0
    }

    pub fn is_free(&self, o: Offset) -> bool {
        !self.is_occupied(o)
    }

    pub fn free(&self, d: Direction) -> bool {
        self.occupied & (1 << d.index()) == 0
    }

    /// Unoccupied neighbour directions, clockwise from `Up`.
    pub fn free_directions(&self) -> impl Iterator<Item = Direction> + '_ {
        Direction::ALL.into_iter().filter(|d| self.free(*d))
    }

    pub fn free_count(&self) -> usize {
        (!self.occupied & 0b1111).count_ones() as usize
    }
}

/// A robot as seen by a controller at decision time.
#[derive(Debug)]
pub struct Agent<'a, M> {
    pub id: RobotId,
    pub pos: Cell,
    pub view: SensorView,
    pub memory: &'a M,
}

/// Everything a controller is handed at one step: the active robots in
/// arrival order.
#[derive(Debug)]
pub struct Swarm<'a, M> {
    pub t: u32,
    pub door: Cell,
    pub agents: Vec<Agent<'a, M>>,
}

/// Decision procedure for a whole swarm. Plain local rules go through
/// [`Local`]; privileged baselines implement this directly and may keep
/// swarm-wide state in `Shared`.
pub trait Controller: Sync {
    type Memory: Clone + Eq + Hash + Debug + Send;
    type Shared: Clone + Eq + Hash + Debug + Default + Send;

    fn name(&self) -> &'static str;

    /// Memory for a robot emerging at the door. `seed` comes from the run's
    /// generator; deterministic rules ignore it.
    fn fresh_memory(&self, seed: u64) -> Self::Memory;

    /// One `(action, memory')` per agent, in the order given.
    fn decide(
        &self,
        swarm: &Swarm<'_, Self::Memory>,
        shared: &mut Self::Shared,
    ) -> Result<Vec<(Action, Self::Memory)>, (RobotId, StrategyError)>;

    /// Primary heading stored in a robot's memory, if the rule has one.
    fn primary(&self, _memory: &Self::Memory) -> Option<Direction> {
        None
    }
}

/// A rule that sees only its own sensor view and memory.
pub trait LocalRule: Sync {
    type Memory: Clone + Eq + Hash + Debug + Send;

    fn name(&self) -> &'static str;
    fn fresh_memory(&self, seed: u64) -> Self::Memory;
    fn decide(&self, view: &SensorView, memory: &Self::Memory) -> Result<(Action, Self::Memory), StrategyError>;
    fn primary(&self, _memory: &Self::Memory) -> Option<Direction> {
        None
    }
}

/// Adapter running a [`LocalRule`] independently for every robot.
#[derive(Debug, Clone, Copy, Default)]
pub struct Local<R>(pub R);

impl<R: LocalRule> Controller for Local<R> {
    type Memory = R::Memory;
    type Shared = ();

    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn fresh_memory(&self, seed: u64) -> R::Memory {
        self.0.fresh_memory(seed)
    }

    fn decide(
        &self,
        swarm: &Swarm<'_, R::Memory>,
        _shared: &mut (),
    ) -> Result<Vec<(Action, R::Memory)>, (RobotId, StrategyError)> {
        swarm
            .agents
            .iter()
            .map(|a| self.0.decide(&a.view, a.memory).map_err(|e| (a.id, e)))
            .collect()
    }

    fn primary(&self, memory: &R::Memory) -> Option<Direction> {
        self.0.primary(memory)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotState<M> {
    pub id: RobotId,
    pub pos: Cell,
    pub lifecycle: Lifecycle,
    pub memory: M,
    /// Steps that began and ended with the robot active.
    pub travel: u64,
    /// Steps in which the robot changed position.
    pub moves: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u32,
}

impl Limits {
    /// Four steps per cell.
    pub fn for_region(r: &Region) -> Limits {
        Limits { max_steps: (4 * r.len()).max(1) as u32 }
    }
}

/// Hook called after every step; returning `Err` aborts the run.
pub trait StepObserver {
    fn observe(&mut self, record: &StepRecord, primaries: &[Option<Direction>]) -> Result<(), String>;
}

const FREE: u32 = 0;
const WALL: u32 = u32::MAX;

#[derive(PartialEq, Eq, Hash)]
struct Configuration<M, S> {
    robots: Vec<(Cell, Lifecycle, M)>,
    shared: S,
}

/// State of a run in progress.
pub struct Simulation<'a, C: Controller> {
    region: &'a Region,
    controller: &'a C,
    seed: u64,
    rng: ChaCha8Rng,
    robots: Vec<RobotState<C::Memory>>,
    shared: C::Shared,
    grid_bounds: Bounds,
    /// `FREE`, `WALL`, or the id of the robot on the cell.
    grid: Vec<u32>,
    occupied_cells: usize,
    t: u32,
    limits: Limits,
    history: HashSet<Configuration<C::Memory, C::Shared>>,
    steps: Vec<StepRecord>,
    outcome: Option<Outcome>,
}

impl<'a, C: Controller> Simulation<'a, C> {
    pub fn new(region: &'a Region, controller: &'a C, seed: u64, limits: Limits) -> Self {
        let grid_bounds = region.bounds().padded(2);
        let grid = grid_bounds.cells().map(|c| if region.contains(c) { FREE } else { WALL }).collect();
        Simulation {
            region,
            controller,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            robots: Vec::new(),
            shared: C::Shared::default(),
            grid_bounds,
            grid,
            occupied_cells: 0,
            t: 0,
            limits: Limits { max_steps: limits.max_steps.max(1) },
            history: HashSet::new(),
            steps: Vec::new(),
            outcome: None,
        }
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn robots(&self) -> &[RobotState<C::Memory>] {
        &self.robots
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    fn cell_value(&self, c: Cell) -> u32 {
        self.grid_bounds.index(c).map_or(WALL, |i| self.grid[i])
    }

    fn set_cell(&mut self, c: Cell, v: u32) {
        let i = self.grid_bounds.index(c).expect("region cell inside grid");
        self.grid[i] = v;
    }

    /// What a robot standing on `pos` senses in the current configuration.
    pub fn sense(&self, pos: Cell) -> SensorView {
        SensorView::from_fn(|o| self.cell_value(pos + o) != FREE)
    }

    /// Advance one step. Returns the outcome once the run has ended.
    pub fn step(&mut self) -> Result<Option<Outcome>, EngineError> {
        self.step_observed(None)
    }

    fn step_observed(&mut self, observer: Option<&mut dyn StepObserver>) -> Result<Option<Outcome>, EngineError> {
        if self.outcome.is_some() {
            return Err(EngineError::Finished);
        }
        self.t += 1;
        let t = self.t;

        // Look + compute against the start-of-step snapshot.
        let active: Vec<usize> =
            (0..self.robots.len()).filter(|&i| self.robots[i].lifecycle.is_active()).collect();
        let views: Vec<SensorView> = active.iter().map(|&i| self.sense(self.robots[i].pos)).collect();
        let decisions = {
            let robots = &self.robots;
            let agents = active
                .iter()
                .zip(views)
                .map(|(&i, view)| {
                    let r = &robots[i];
                    Agent { id: r.id, pos: r.pos, view, memory: &r.memory }
                })
                .collect();
            let swarm = Swarm { t, door: self.region.door(), agents };
            self.controller
                .decide(&swarm, &mut self.shared)
                .map_err(|(robot, source)| EngineError::Strategy { t, robot, source })?
        };
        if decisions.len() != active.len() {
            return Err(EngineError::DecisionCount { t, expected: active.len(), got: decisions.len() });
        }

        let mut targets: HashSet<Cell> = HashSet::new();
        for (&i, (action, _)) in active.iter().zip(&decisions) {
            if let Action::Move(d) = action {
                let r = &self.robots[i];
                let target = r.pos.step(*d);
                let v = self.cell_value(target);
                if v != FREE {
                    let what = if v == WALL { "a wall".to_string() } else { format!("robot {v}") };
                    return Err(EngineError::Collision {
                        t,
                        detail: format!("robot {} at {} moves {:?} into {} occupied by {}", r.id, r.pos, d, target, what),
                    });
                }
                if !targets.insert(target) {
                    return Err(EngineError::Collision {
                        t,
                        detail: format!("robot {} at {} and another robot both move into {}", r.id, r.pos, target),
                    });
                }
            }
        }
        let door = self.region.door();
        let spawn = self.cell_value(door) == FREE && !targets.contains(&door);

        // Move.
        let mut settled_any = false;
        let mut acts: Vec<Action> = vec![Action::Stay; self.robots.len()];
        for (&i, (action, memory)) in active.iter().zip(decisions) {
            acts[i] = action;
            let old = self.robots[i].pos;
            match action {
                Action::Move(d) => {
                    self.set_cell(old, FREE);
                    let r = &mut self.robots[i];
                    r.pos = old.step(d);
                    r.moves += 1;
                    r.travel += 1;
                }
                Action::Stay => self.robots[i].travel += 1,
                Action::Settle => {
                    self.robots[i].lifecycle = Lifecycle::Settled;
                    settled_any = true;
                }
            }
            self.robots[i].memory = memory;
        }
        for &i in &active {
            let (pos, id) = (self.robots[i].pos, self.robots[i].id);
            self.set_cell(pos, id);
        }

        let spawned = if spawn {
            let id = self.robots.len() as RobotId + 1;
            let memory = self.controller.fresh_memory(self.rng.next_u64());
            self.robots.push(RobotState { id, pos: door, lifecycle: Lifecycle::Active, memory, travel: 0, moves: 0 });
            acts.push(Action::Stay);
            self.set_cell(door, id);
            self.occupied_cells += 1;
            Some(id)
        } else {
            None
        };

        let record = StepRecord {
            t,
            spawn: spawned,
            robots: self
                .robots
                .iter()
                .zip(&acts)
                .map(|(r, a)| RobotRecord { id: r.id, pos: r.pos, state: r.lifecycle, act: *a })
                .collect(),
        };
        if let Some(obs) = observer {
            let primaries: Vec<Option<Direction>> =
                self.robots.iter().map(|r| self.controller.primary(&r.memory)).collect();
            obs.observe(&record, &primaries).map_err(|message| EngineError::Invariant { t, message })?;
        }
        self.steps.push(record);

        let outcome = if self.occupied_cells == self.region.len() {
            Some(Outcome::Covered(t))
        } else {
            if spawned.is_some() || settled_any {
                self.history.clear();
            }
            let config = Configuration {
                robots: self.robots.iter().map(|r| (r.pos, r.lifecycle, r.memory.clone())).collect(),
                shared: self.shared.clone(),
            };
            if !self.history.insert(config) {
                Some(Outcome::Deadlock(t))
            } else if t >= self.limits.max_steps {
                Some(Outcome::StepLimit(t))
            } else {
                None
            }
        };
        self.outcome = outcome;
        Ok(outcome)
    }

    /// Run to completion.
    pub fn run_to_end(&mut self, mut observer: Option<&mut dyn StepObserver>) -> Result<Outcome, EngineError> {
        loop {
            let obs = observer.as_mut().map(|o| &mut **o as &mut dyn StepObserver);
            if let Some(outcome) = self.step_observed(obs)? {
                return Ok(outcome);
            }
        }
    }

    pub fn into_trace(self) -> SimulationTrace {
        SimulationTrace {
            env: self.region.to_ascii(),
            strategy: self.controller.name().to_string(),
            seed: self.seed,
            outcome: self.outcome.unwrap_or(Outcome::StepLimit(self.t)),
            steps: self.steps,
        }
    }
}

/// Run a controller on a region from an empty start.
pub fn run<C: Controller>(region: &Region, controller: &C, seed: u64, limits: Limits) -> Result<SimulationTrace, EngineError> {
    run_observed(region, controller, seed, limits, None)
}

pub fn run_observed<C: Controller>(
    region: &Region,
    controller: &C,
    seed: u64,
    limits: Limits,
    observer: Option<&mut dyn StepObserver>,
) -> Result<SimulationTrace, EngineError> {
    let mut sim = Simulation::new(region, controller, seed, limits);
    sim.run_to_end(observer)?;
    Ok(sim.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every robot replays a fixed script, then stays.
    struct Scripted(Vec<Vec<Action>>);

    impl Controller for Scripted {
        type Memory = u32;
        type Shared = ();

        fn name(&self) -> &'static str {
            "scripted"
        }

        fn fresh_memory(&self, _seed: u64) -> u32 {
            0
        }

        fn decide(&self, swarm: &Swarm<'_, u32>, _: &mut ()) -> Result<Vec<(Action, u32)>, (RobotId, StrategyError)> {
            Ok(swarm
                .agents
                .iter()
                .map(|a| {
                    let script = &self.0[(a.id - 1) as usize];
                    let act = script.get(*a.memory as usize).copied().unwrap_or(Action::Stay);
                    (act, a.memory + 1)
                })
                .collect())
        }
    }

    #[test]
    fn first_step_spawns_without_acting() {
        let r = Region::from_ascii("S.").unwrap();
        let ctl = Scripted(vec![vec![Action::Move(Direction::Right)]]);
        let mut sim = Simulation::new(&r, &ctl, 0, Limits::for_region(&r));
        assert_eq!(sim.step().unwrap(), None);
        assert_eq!(sim.robots().len(), 1);
        assert_eq!(sim.robots()[0].pos, r.door());
        assert_eq!(sim.steps()[0].spawn, Some(1));
        // Step 2: robot 1 moves; the door was occupied at the snapshot so no spawn.
        assert_eq!(sim.step().unwrap(), None);
        assert_eq!(sim.robots()[0].pos, Cell::new(1, 0));
        assert_eq!(sim.steps()[1].spawn, None);
        assert_eq!(sim.robots()[0].travel, 1);
        // Step 3: door free at the snapshot, robot 2 appears and covers.
        assert_eq!(sim.step().unwrap(), Some(Outcome::Covered(3)));
        assert_eq!(sim.step(), Err(EngineError::Finished));
    }

    #[test]
    fn two_robots_targeting_one_cell_collide() {
        // Robot 1 parks at (1,2), robot 2 at (1,0); at step 6 both step into (1,1).
        let r = Region::from_ascii("...\nS..\n...").unwrap();
        let (up, right, down) = (Action::Move(Direction::Up), Action::Move(Direction::Right), Action::Move(Direction::Down));
        let ctl = Scripted(vec![
            vec![up, Action::Stay, right, Action::Stay, down],
            vec![down, right, up],
            vec![],
        ]);
        let mut sim = Simulation::new(&r, &ctl, 0, Limits::for_region(&r));
        let mut err = None;
        for _ in 0..8 {
            match sim.step() {
                Ok(_) => {}
                Err(e) => {
                    err = Some(e);
                    break;
                }
            }
        }
        assert!(matches!(&err, Some(EngineError::Collision { t: 6, detail }) if detail.contains("both")), "{err:?}");
    }

    #[test]
    fn moving_into_a_wall_is_a_collision() {
        let r = Region::from_ascii("S.").unwrap();
        let ctl = Scripted(vec![vec![Action::Move(Direction::Up)]]);
        let mut sim = Simulation::new(&r, &ctl, 0, Limits::for_region(&r));
        sim.step().unwrap();
        assert!(matches!(sim.step(), Err(EngineError::Collision { t: 2, .. })));
    }

    #[test]
    fn stalled_swarm_is_reported_as_deadlock() {
        let r = Region::from_ascii("S..").unwrap();
        let ctl = Scripted(vec![vec![]]);
        // Memory counts steps, so configurations never repeat: hits the limit.
        let trace = run(&r, &ctl, 0, Limits { max_steps: 5 }).unwrap();
        assert_eq!(trace.outcome, Outcome::StepLimit(5));

        struct Frozen;
        impl Controller for Frozen {
            type Memory = ();
            type Shared = ();
            fn name(&self) -> &'static str {
                "frozen"
            }
            fn fresh_memory(&self, _: u64) {}
            fn decide(&self, s: &Swarm<'_, ()>, _: &mut ()) -> Result<Vec<(Action, ())>, (RobotId, StrategyError)> {
                Ok(s.agents.iter().map(|_| (Action::Stay, ())).collect())
            }
        }
        let trace = run(&r, &Frozen, 0, Limits { max_steps: 50 }).unwrap();
        assert_eq!(trace.outcome, Outcome::Deadlock(2));
    }

    #[test]
    fn view_does_not_tell_walls_from_robots() {
        // Robot at (0,0) with a settled robot two cells to the right, versus
        // the same robot with a wall there.
        let open = Region::from_ascii("S..").unwrap();
        let walled = Region::from_ascii("S.#").unwrap();
        let ctl = Scripted(vec![vec![]]);
        let mut a = Simulation::new(&open, &ctl, 0, Limits::for_region(&open));
        a.robots.push(RobotState {
            id: 1,
            pos: Cell::new(2, 0),
            lifecycle: Lifecycle::Settled,
            memory: 0,
            travel: 0,
            moves: 0,
        });
        a.set_cell(Cell::new(2, 0), 1);
        let b = Simulation::new(&walled, &ctl, 0, Limits::for_region(&walled));
        assert_eq!(a.sense(Cell::new(0, 0)), b.sense(Cell::new(0, 0)));
    }

    #[test]
    fn sensor_view_queries() {
        let r = Region::from_ascii(".....\n.....\n..S..\n.....\n.....").unwrap();
        let ctl = Scripted(vec![]);
        let sim = Simulation::new(&r, &ctl, 0, Limits::for_region(&r));
        let v = sim.sense(r.door());
        assert!(SensorView::OFFSETS.iter().all(|o| v.is_free(*o)));
        assert_eq!(v.free_count(), 4);

        let row = Region::from_ascii("S.").unwrap();
        let sim = Simulation::new(&row, &ctl, 0, Limits::for_region(&row));
        let v = sim.sense(row.door());
        assert!(!v.free(Direction::Up) && !v.free(Direction::Down) && !v.free(Direction::Left));
        assert!(v.free(Direction::Right));
        assert_eq!(v.free_directions().collect::<Vec<_>>(), vec![Direction::Right]);
    }
}
