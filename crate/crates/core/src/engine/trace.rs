//! Run traces and their JSON form.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::grid_env::{Cell, Direction};

/// Robot identifier: its arrival index, starting at 1.
pub type RobotId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lifecycle {
    Active,
    Settled,
}

impl Lifecycle {
    pub fn is_active(self) -> bool {
        self == Lifecycle::Active
    }
}

impl Serialize for Lifecycle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Lifecycle::Active => "A",
            Lifecycle::Settled => "S",
        })
    }
}

impl<'de> Deserialize<'de> for Lifecycle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "A" => Ok(Lifecycle::Active),
            "S" => Ok(Lifecycle::Settled),
            other => Err(serde::de::Error::custom(format!("unknown robot state {other:?}"))),
        }
    }
}

/// What a robot does in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Move(Direction),
    Stay,
    Settle,
}

impl Action {
    pub fn code(self) -> char {
        match self {
            Action::Move(d) => d.letter(),
            Action::Stay => '.',
            Action::Settle => 'X',
        }
    }

    pub fn from_code(c: char) -> Option<Action> {
        Some(match c {
            'U' => Action::Move(Direction::Up),
            'R' => Action::Move(Direction::Right),
            'D' => Action::Move(Direction::Down),
            'L' => Action::Move(Direction::Left),
            '.' => Action::Stay,
            'X' => Action::Settle,
            _ => return None,
        })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut buf = [0u8; 4];
        s.serialize_str(self.code().encode_utf8(&mut buf))
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                Action::from_code(c).ok_or_else(|| serde::de::Error::custom(format!("unknown action {s:?}")))
            }
            _ => Err(serde::de::Error::custom(format!("unknown action {s:?}"))),
        }
    }
}

/// One robot at the end of a step. `act` is what it did during the step;
/// robots that did not act (already settled, or spawned this step) show `.`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotRecord {
    pub id: RobotId,
    pub pos: Cell,
    pub state: Lifecycle,
    pub act: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u32,
    pub spawn: Option<RobotId>,
    pub robots: Vec<RobotRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Covered(u32),
    Deadlock(u32),
    StepLimit(u32),
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Covered(_) => "covered",
            Outcome::Deadlock(_) => "deadlock",
            Outcome::StepLimit(_) => "limit",
        }
    }

    pub fn t(&self) -> u32 {
        match *self {
            Outcome::Covered(t) | Outcome::Deadlock(t) | Outcome::StepLimit(t) => t,
        }
    }

    pub fn is_covered(&self) -> bool {
        matches!(self, Outcome::Covered(_))
    }
}

#[derive(Serialize, Deserialize)]
struct OutcomeRepr {
    kind: String,
    t: u32,
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        OutcomeRepr { kind: self.kind().to_string(), t: self.t() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = OutcomeRepr::deserialize(d)?;
        match r.kind.as_str() {
            "covered" => Ok(Outcome::Covered(r.t)),
            "deadlock" => Ok(Outcome::Deadlock(r.t)),
            "limit" => Ok(Outcome::StepLimit(r.t)),
            other => Err(serde::de::Error::custom(format!("unknown outcome {other:?}"))),
        }
    }
}

/// Full record of a run. Field order is part of the JSON format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub env: String,
    pub strategy: String,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl SimulationTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<SimulationTrace, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn last_t(&self) -> u32 {
        self.steps.last().map_or(0, |s| s.t)
    }

    /// Record for step `t` (1-based).
    pub fn step(&self, t: u32) -> Option<&StepRecord> {
        let idx = (t as usize).checked_sub(1)?;
        self.steps.get(idx).filter(|s| s.t == t)
    }

    pub fn robot_count(&self) -> usize {
        self.steps.last().map_or(0, |s| s.robots.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout_is_fixed() {
        let trace = SimulationTrace {
            env: "S.\n".into(),
            strategy: "fcdfs".into(),
            seed: 7,
            steps: vec![
                StepRecord { t: 1, spawn: Some(1), robots: vec![RobotRecord {
                    id: 1,
                    pos: Cell::new(0, 0),
                    state: Lifecycle::Active,
                    act: Action::Stay,
                }] },
                StepRecord { t: 2, spawn: None, robots: vec![RobotRecord {
                    id: 1,
                    pos: Cell::new(1, 0),
                    state: Lifecycle::Active,
                    act: Action::Move(Direction::Right),
                }] },
            ],
            outcome: Outcome::Covered(3),
        };
        let json = trace.to_json();
        assert_eq!(
            json,
            r#"{"env":"S.\n","strategy":"fcdfs","seed":7,"steps":[{"t":1,"spawn":1,"robots":[{"id":1,"pos":[0,0],"state":"A","act":"."}]},{"t":2,"spawn":null,"robots":[{"id":1,"pos":[1,0],"state":"A","act":"R"}]}],"outcome":{"kind":"covered","t":3}}"#
        );
        assert_eq!(SimulationTrace::from_json(&json).unwrap(), trace);
        assert_eq!(trace.step(2).unwrap().t, 2);
        assert!(trace.step(0).is_none());
        assert!(trace.step(3).is_none());
    }

    #[test]
    fn rejects_unknown_codes() {
        assert!(serde_json::from_str::<Action>("\"Q\"").is_err());
        assert!(serde_json::from_str::<Lifecycle>("\"Z\"").is_err());
        assert!(serde_json::from_str::<Outcome>(r#"{"kind":"boom","t":1}"#).is_err());
    }
}
