//! Simulation and analysis toolkit for uniform dispersal of robot swarms on
//! grid environments.
//!
//! Robots enter a region one at a time through a door and must spread out
//! until every cell is occupied, using only what they sense within Manhattan
//! distance 2 and a few bits of memory.

pub mod cli;
pub mod engine;
pub mod envgen;
pub mod grid_env;
pub mod metrics;
pub mod render;
pub mod strategies;
pub mod topology;

pub use engine::{Action, Outcome, SimulationTrace};
pub use grid_env::{Cell, Direction, Region};
