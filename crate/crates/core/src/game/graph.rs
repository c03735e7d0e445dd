//! Graph traversal: visit every node exactly once. A chosen direction keeps
//! sliding until the next cell is visited, blocked or off the grid.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Attempt, Direction, GameError, GridPos, Rejection, StageStatus};
use crate::telemetry::event::{Emitted, EventType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphLevel {
    pub stage_id: u8,
    pub rows: u8,
    pub cols: u8,
    pub nodes: BTreeSet<GridPos>,
    #[serde(default)]
    pub obstacles: BTreeSet<GridPos>,
    pub start: GridPos,
    pub time_limit_s: u32,
    #[serde(default)]
    pub tutorial: String,
}

impl GraphLevel {
    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: &str| Err(GameError::InvalidLevel(format!("graph stage {}: {m}", self.stage_id)));
        if !(1..=4).contains(&self.stage_id) {
            return bad("stage_id must be 1..4");
        }
        if !self.nodes.contains(&self.start) {
            return bad("start is not a node");
        }
        if self.nodes.iter().chain(&self.obstacles).any(|p| !p.in_bounds(self.rows, self.cols)) {
            return bad("cell out of bounds");
        }
        if self.nodes.intersection(&self.obstacles).next().is_some() {
            return bad("nodes and obstacles overlap");
        }
        if self.time_limit_s == 0 {
            return bad("time_limit_s must be positive");
        }
        Ok(())
    }

    /// Cells entered when sliding from `from` in `dir` given the visited set.
    pub fn slide(&self, from: GridPos, dir: Direction, visited: &BTreeSet<GridPos>) -> Vec<GridPos> {
        let mut path = Vec::new();
        let mut cur = from;
        while let Some(next) = cur.step(dir, self.rows, self.cols) {
            if !self.nodes.contains(&next) || visited.contains(&next) {
                break;
            }
            path.push(next);
            cur = next;
        }
        path
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphState {
    pub level: GraphLevel,
    pub visited: Vec<GridPos>,
    visited_set: BTreeSet<GridPos>,
    pub attempt: Attempt,
}

impl GraphState {
    pub fn new(level: GraphLevel) -> Self {
        let start = level.start;
        let attempt = Attempt::new(level.time_limit_s);
        let mut s = GraphState { level, visited: vec![start], visited_set: BTreeSet::from([start]), attempt };
        s.settle();
        s
    }

    pub fn current(&self) -> GridPos {
        *self.visited.last().expect("visited always holds the start node")
    }

    pub fn status(&self) -> StageStatus {
        self.attempt.status
    }

    pub fn is_complete(&self) -> bool {
        self.visited_set.len() == self.level.nodes.len()
    }

    pub fn advancing_directions(&self) -> Vec<Direction> {
        Direction::ALL
            .into_iter()
            .filter(|&d| !self.level.slide(self.current(), d, &self.visited_set).is_empty())
            .collect()
    }

    /// Marks won/stuck; returns the terminal event if the status changed.
    fn settle(&mut self) -> Option<Emitted> {
        if self.is_complete() {
            self.attempt.status = StageStatus::Won;
            Some(Emitted::new(EventType::Win).with("moves_used", self.attempt.moves_used))
        } else if self.advancing_directions().is_empty() {
            self.attempt.status = StageStatus::Stuck;
            Some(Emitted::new(EventType::Lose).with("reason", "stuck").with("visited", self.visited.len()))
        } else {
            None
        }
    }

    pub fn apply(&mut self, dir: Direction) -> Result<Result<Vec<Emitted>, Rejection>, GameError> {
        self.attempt.ensure_playing()?;
        let path = self.level.slide(self.current(), dir, &self.visited_set);
        if path.is_empty() {
            return Ok(Err(Rejection::NoAdvance));
        }
        let from = self.current();
        for &p in &path {
            self.visited.push(p);
            self.visited_set.insert(p);
        }
        self.attempt.moves_used += 1;
        let mut events = vec![Emitted::new(EventType::MoveAccepted)
            .with("direction", dir.as_str())
            .with("from", from.to_string())
            .with("to", self.current().to_string())
            .with("advanced", path.len())];
        events.extend(self.settle());
        Ok(Ok(events))
    }

    pub fn restart(&mut self) -> Result<(), GameError> {
        self.attempt.restart()?;
        self.visited = vec![self.level.start];
        self.visited_set = BTreeSet::from([self.level.start]);
        self.settle();
        Ok(())
    }
}
