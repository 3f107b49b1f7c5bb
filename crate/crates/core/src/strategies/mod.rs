//! Decision rules and the name registry used by the command line.
//!
//! `fcdfs`, `fcdfs5`, `rand-corner` and `left-hand` are local rules: each
//! robot sees only its sensor view and its own memory. `dflf` and `bflf` are
//! privileged baselines that coordinate through shared swarm state.

pub mod bflf;
pub mod dflf;
pub mod fcdfs;
pub mod fcdfs5;
pub mod variants;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::engine::{run_observed, Controller, EngineError, InvariantChecker, Limits, Local, SimulationTrace, StepObserver};
use crate::grid_env::Region;

pub use bflf::Bflf;
pub use dflf::Dflf;
pub use fcdfs::{Fcdfs, FcdfsMemory};
pub use fcdfs5::{Fcdfs5, FiveBits};
pub use variants::{LeftHand, RandCorner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Fcdfs,
    Fcdfs5,
    RandCorner,
    LeftHand,
    Dflf,
    Bflf,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown strategy {0:?} (expected one of: fcdfs, fcdfs5, rand-corner, left-hand, dflf, bflf)")]
pub struct UnknownStrategy(pub String);

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Fcdfs,
        StrategyKind::Fcdfs5,
        StrategyKind::RandCorner,
        StrategyKind::LeftHand,
        StrategyKind::Dflf,
        StrategyKind::Bflf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Fcdfs => "fcdfs",
            StrategyKind::Fcdfs5 => "fcdfs5",
            StrategyKind::RandCorner => "rand-corner",
            StrategyKind::LeftHand => "left-hand",
            StrategyKind::Dflf => "dflf",
            StrategyKind::Bflf => "bflf",
        }
    }

    /// Baselines that use swarm-wide coordination beyond local sensing.
    pub fn is_privileged(self) -> bool {
        matches!(self, StrategyKind::Dflf | StrategyKind::Bflf)
    }

    /// Whether the seed can influence the run.
    pub fn is_randomized(self) -> bool {
        matches!(self, StrategyKind::RandCorner | StrategyKind::Dflf | StrategyKind::Bflf)
    }

    /// Run on `region`. With `check`, every step is validated by an
    /// [`InvariantChecker`]; a violation ends the run with
    /// [`EngineError::Invariant`].
    pub fn run(self, region: &Region, seed: u64, limits: Limits, check: bool) -> Result<SimulationTrace, EngineError> {
        match self {
            StrategyKind::Fcdfs => go(region, &Local(Fcdfs), seed, limits, check),
            StrategyKind::Fcdfs5 => go(region, &Local(Fcdfs5), seed, limits, check),
            StrategyKind::RandCorner => go(region, &Local(RandCorner), seed, limits, check),
            StrategyKind::LeftHand => go(region, &Local(LeftHand), seed, limits, check),
            StrategyKind::Dflf => go(region, &Dflf, seed, limits, check),
            StrategyKind::Bflf => go(region, &Bflf, seed, limits, check),
        }
    }
}

fn go<C: Controller>(region: &Region, ctl: &C, seed: u64, limits: Limits, check: bool) -> Result<SimulationTrace, EngineError> {
    let mut checker = check.then(|| InvariantChecker::new(region));
    run_observed(region, ctl, seed, limits, checker.as_mut().map(|c| c as &mut dyn StepObserver))
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}
