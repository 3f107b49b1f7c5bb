//! Per-step invariant assertions for corner-seeking rules on simply
//! connected regions.

use std::collections::{HashSet, VecDeque};

use crate::grid_env::{Cell, Direction, Region};
use crate::topology::{classify_with, DistanceCache, VertexKind};

use super::trace::{Lifecycle, StepRecord};
use super::StepObserver;

/// Checks, after every step:
///
/// * no two robots share a cell;
/// * active robots `A_i`, `A_j` (`i < j`) are at least `2(j - i)` apart;
/// * `next(A_{i+1}) = prev(A_i)` for every `A_i` active at the step start;
/// * robots settle only on corners of the residual region;
/// * primary directions change only on halls of the residual region.
pub struct InvariantChecker {
    region: Region,
    distances: DistanceCache,
    /// The last two records, oldest first.
    history: VecDeque<StepRecord>,
    primaries: Vec<Option<Direction>>,
    pub spacing: bool,
    pub follow_the_leader: bool,
    pub corner_settle: bool,
    pub hall_redirect: bool,
}

impl InvariantChecker {
    pub fn new(region: &Region) -> Self {
        InvariantChecker {
            region: region.clone(),
            distances: DistanceCache::new(region),
            history: VecDeque::with_capacity(3),
            primaries: Vec::new(),
            spacing: true,
            follow_the_leader: true,
            corner_settle: true,
            hall_redirect: true,
        }
    }

    fn residual_kind(&self, before: &StepRecord, v: Cell) -> VertexKind {
        let settled: HashSet<Cell> =
            before.robots.iter().filter(|r| r.state == Lifecycle::Settled).map(|r| r.pos).collect();
        classify_with(|c| self.region.contains(c) && !settled.contains(&c), v).kind
    }
}

impl StepObserver for InvariantChecker {
    fn observe(&mut self, record: &StepRecord, primaries: &[Option<Direction>]) -> Result<(), String> {
        let t = record.t;
        let empty = StepRecord { t: t.saturating_sub(1), spawn: None, robots: Vec::new() };
        let before = self.history.back().unwrap_or(&empty).clone();
        let before2 = if self.history.len() == 2 { self.history.front().cloned() } else { None };
        let before2 = before2.unwrap_or(StepRecord { t: 0, spawn: None, robots: Vec::new() });

        let mut seen = HashSet::new();
        for r in &record.robots {
            if !seen.insert(r.pos) {
                return Err(format!("two robots share cell {}", r.pos));
            }
        }

        for (idx, prev) in before.robots.iter().enumerate() {
            if prev.state != Lifecycle::Active {
                continue;
            }
            let now = &record.robots[idx];
            if self.corner_settle && now.state == Lifecycle::Settled {
                let kind = self.residual_kind(&before, prev.pos);
                if kind != VertexKind::Corner {
                    return Err(format!("robot {} settled at {} which is a {:?} of R(t)", prev.id, prev.pos, kind));
                }
            }
            let first_decision = before.spawn == Some(prev.id);
            if self.hall_redirect && now.state == Lifecycle::Active && !first_decision {
                let (old, new) = (self.primaries.get(idx).copied().flatten(), primaries[idx]);
                if old.is_some() && new.is_some() && old != new {
                    let kind = self.residual_kind(&before, prev.pos);
                    if kind != VertexKind::Hall {
                        return Err(format!(
                            "robot {} changed primary {:?} -> {:?} at {} which is a {:?} of R(t)",
                            prev.id,
                            old.unwrap(),
                            new.unwrap(),
                            prev.pos,
                            kind
                        ));
                    }
                }
            }
            if self.follow_the_leader {
                if let (Some(two_back), Some(next)) = (before2.robots.get(idx), record.robots.get(idx + 1)) {
                    if next.pos != two_back.pos {
                        return Err(format!(
                            "follow-the-leader: robot {} is at {} but robot {} was at {} at the start of step {}",
                            next.id,
                            next.pos,
                            prev.id,
                            two_back.pos,
                            t - 1
                        ));
                    }
                }
            }
        }

        if self.spacing {
            let active: Vec<_> = record.robots.iter().filter(|r| r.state == Lifecycle::Active).collect();
            for (k, a) in active.iter().enumerate() {
                for b in &active[k + 1..] {
                    let need = 2 * (b.id - a.id);
                    let d = self.distances.distance(a.pos, b.pos).unwrap_or(u32::MAX);
                    if d < need {
                        return Err(format!(
                            "robots {} at {} and {} at {} are {} apart, need at least {}",
                            a.id, a.pos, b.id, b.pos, d, need
                        ));
                    }
                }
            }
        }

        if self.history.len() == 2 {
            self.history.pop_front();
        }
        self.history.push_back(record.clone());
        self.primaries = primaries.to_vec();
        Ok(())
    }
}
