//! FCDFS as a 32-state automaton.
//!
//! Word layout, most significant first: `b1 b2 b3 b4 b5`.
//! `b1b2` is the primary direction (0 = Up, clockwise), `b3` records whether
//! the last step went in the secondary direction, and `b4b5` is a counter
//! that is `00` before initialisation, `10` right after initialisation or a
//! hall, and `b 1` afterwards where `b` is the previous `b3`. Settling writes
//! `b3b4b5 = 011`. A moving robot can also hold `011` (a secondary step
//! followed by a primary one), so the engine's lifecycle, not the word, is
//! what stops a settled robot from acting.

use crate::engine::{Action, LocalRule, SensorView, StrategyError};
use crate::grid_env::Direction;

use super::fcdfs::{diagonal, first_free};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FiveBits(u8);

impl FiveBits {
    const SETTLED: u8 = 0b011;

    pub fn from_bits(bits: u8) -> Option<FiveBits> {
        (bits < 32).then_some(FiveBits(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn primary(self) -> Direction {
        Direction::from_index(self.0 >> 3)
    }

    fn b3(self) -> u8 {
        (self.0 >> 2) & 1
    }

    fn b4(self) -> u8 {
        (self.0 >> 1) & 1
    }

    fn b5(self) -> u8 {
        self.0 & 1
    }

    fn low3(self) -> u8 {
        self.0 & 0b111
    }

    /// Whether the low bits carry the settle marker.
    pub fn has_settle_marker(self) -> bool {
        self.low3() == Self::SETTLED
    }

    fn set_primary(&mut self, d: Direction) {
        self.0 = (self.0 & 0b111) | (d.index() << 3);
    }

    fn set_b3(&mut self, b: u8) {
        self.0 = (self.0 & !0b100) | (b << 2);
    }

    fn set_counter(&mut self, b4: u8, b5: u8) {
        self.0 = (self.0 & !0b11) | (b4 << 1) | b5;
    }

    fn settle(mut self) -> (Action, FiveBits) {
        self.0 = (self.0 & !0b111) | Self::SETTLED;
        (Action::Settle, self)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Fcdfs5;

impl LocalRule for Fcdfs5 {
    type Memory = FiveBits;

    fn name(&self) -> &'static str {
        "fcdfs5"
    }

    fn fresh_memory(&self, _seed: u64) -> FiveBits {
        FiveBits(0)
    }

    fn decide(&self, view: &SensorView, m: &FiveBits) -> Result<(Action, FiveBits), StrategyError> {
        let mut m = *m;
        let mut updated = false;
        if view.free_count() == 0 {
            return Ok(m.settle());
        } else if m.b4() == 0 && m.b5() == 0 {
            m.set_primary(first_free(view).expect("a neighbour is free"));
            m.set_counter(1, 0);
            updated = true;
        }

        let p = m.primary();
        if !view.free(p) && !view.free(p.cw()) {
            if view.free_count() == 1 {
                return Ok(m.settle());
            } else if (m.b5() == 1 && m.b3() + m.b4() == 1) || view.is_free(diagonal(p)) {
                return Ok(m.settle());
            } else {
                let last = if m.b3() == 1 { p.cw() } else { p };
                let back = last.opposite();
                let d = view
                    .free_directions()
                    .find(|d| *d != back)
                    .ok_or_else(|| StrategyError::NoLegalAction(format!("no exit from hall, bits {:05b}", m.0)))?;
                m.set_primary(d);
                m.set_counter(1, 0);
                updated = true;
            }
        }

        if !updated {
            let b3 = m.b3();
            m.set_counter(b3, 1);
        }

        let p = m.primary();
        if view.free(p) {
            m.set_b3(0);
            Ok((Action::Move(p), m))
        } else if view.free(p.cw()) {
            m.set_b3(1);
            Ok((Action::Move(p.cw()), m))
        } else {
            Ok(m.settle())
        }
    }

    fn primary(&self, m: &FiveBits) -> Option<Direction> {
        (m.b4() | m.b5() != 0).then(|| m.primary())
    }
}
