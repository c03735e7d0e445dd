//! Group-swapping puzzle: two groups of pieces exchange their cell sets.
//!
//! A move picks one piece and steps it to a 4-neighbouring empty cell.
//! Refused moves are neither counted nor logged.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Attempt, GameError, GridPos, Rejection, StageStatus};
use crate::telemetry::event::{Emitted, EventType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSwapStage {
    Tutorial,
    Medium,
    Hard,
}

impl GroupSwapStage {
    pub fn number(self) -> u8 {
        match self {
            GroupSwapStage::Tutorial => 1,
            GroupSwapStage::Medium => 2,
            GroupSwapStage::Hard => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroupSwapStage::Tutorial => "tutorial",
            GroupSwapStage::Medium => "medium",
            GroupSwapStage::Hard => "hard",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSwapLevel {
    pub stage_id: GroupSwapStage,
    pub rows: u8,
    pub cols: u8,
    pub group_a_cells: Vec<GridPos>,
    pub group_b_cells: Vec<GridPos>,
    pub move_limit: u32,
    pub time_limit_s: u32,
    #[serde(default)]
    pub tutorial: String,
}

impl GroupSwapLevel {
    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: String| Err(GameError::InvalidLevel(format!("group_swap stage {}: {m}", self.stage_id.number())));
        if self.rows == 0 || self.cols == 0 {
            return bad("empty grid".into());
        }
        if self.group_a_cells.len() != self.group_b_cells.len() {
            return bad("groups differ in size".into());
        }
        if self.group_a_cells.is_empty() {
            return bad("groups are empty".into());
        }
        if self.move_limit == 0 {
            return bad("move_limit must be positive".into());
        }
        if self.time_limit_s == 0 {
            return bad("time_limit_s must be positive".into());
        }
        let mut seen = BTreeSet::new();
        for &p in self.group_a_cells.iter().chain(&self.group_b_cells) {
            if !p.in_bounds(self.rows, self.cols) {
                return bad(format!("cell {p} out of bounds"));
            }
            if !seen.insert(p) {
                return bad(format!("cell {p} listed twice"));
            }
        }
        Ok(())
    }

    pub fn group_size(&self) -> usize {
        self.group_a_cells.len()
    }

    pub fn cell_count(&self) -> usize {
        usize::from(self.rows) * usize::from(self.cols)
    }

    pub fn initial_positions(&self) -> Vec<GridPos> {
        self.group_a_cells.iter().chain(&self.group_b_cells).copied().collect()
    }

    /// Whether pieces at `positions` (group A first) have exchanged places.
    pub fn is_swapped(&self, positions: &[GridPos]) -> bool {
        let n = self.group_size();
        let a: BTreeSet<_> = positions[..n].iter().collect();
        let b: BTreeSet<_> = positions[n..].iter().collect();
        let target_a: BTreeSet<_> = self.group_b_cells.iter().collect();
        let target_b: BTreeSet<_> = self.group_a_cells.iter().collect();
        a == target_a && b == target_b
    }
}

/// A single piece step; pieces `0..n` are group A, `n..2n` group B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SwapMove {
    pub piece: u8,
    pub target: GridPos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MoveOutcome {
    Accepted(Vec<Emitted>),
    Rejected(Rejection),
}

impl MoveOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, MoveOutcome::Accepted(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSwapState {
    pub level: GroupSwapLevel,
    pub piece_positions: Vec<GridPos>,
    pub attempt: Attempt,
}

impl GroupSwapState {
    pub fn new(level: GroupSwapLevel) -> Self {
        let piece_positions = level.initial_positions();
        let attempt = Attempt::new(level.time_limit_s);
        GroupSwapState { level, piece_positions, attempt }
    }

    pub fn status(&self) -> StageStatus {
        self.attempt.status
    }

    pub fn moves_used(&self) -> u32 {
        self.attempt.moves_used
    }

    pub fn is_solved(&self) -> bool {
        self.level.is_swapped(&self.piece_positions)
    }

    fn occupied(&self, p: GridPos) -> bool {
        self.piece_positions.contains(&p)
    }

    pub fn check_move(&self, mv: SwapMove) -> Result<(), Rejection> {
        let from = *self.piece_positions.get(usize::from(mv.piece)).ok_or(Rejection::UnknownPiece)?;
        if !mv.target.in_bounds(self.level.rows, self.level.cols) {
            return Err(Rejection::OutOfBounds);
        }
        if from.manhattan(mv.target) != 1 {
            return Err(Rejection::NotAdjacent);
        }
        if self.occupied(mv.target) {
            return Err(Rejection::Occupied);
        }
        Ok(())
    }

    /// Every accepted move from the current position in lexicographic order.
    pub fn legal_moves(&self) -> Vec<SwapMove> {
        let mut out = Vec::new();
        for (i, &p) in self.piece_positions.iter().enumerate() {
            for d in super::Direction::ALL {
                if let Some(t) = p.step(d, self.level.rows, self.level.cols) {
                    if !self.occupied(t) {
                        out.push(SwapMove { piece: i as u8, target: t });
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub fn apply(&mut self, mv: SwapMove) -> Result<MoveOutcome, GameError> {
        self.attempt.ensure_playing()?;
        if let Err(r) = self.check_move(mv) {
            return Ok(MoveOutcome::Rejected(r));
        }
        let from = self.piece_positions[usize::from(mv.piece)];
        self.piece_positions[usize::from(mv.piece)] = mv.target;
        self.attempt.moves_used += 1;
        let mut events = vec![Emitted::new(EventType::MoveAccepted)
            .with("piece", i64::from(mv.piece))
            .with("from", from.to_string())
            .with("to", mv.target.to_string())
            .with("moves_used", self.attempt.moves_used)];
        if self.is_solved() {
            self.attempt.status = StageStatus::Won;
            events.push(Emitted::new(EventType::Win).with("moves_used", self.attempt.moves_used));
        } else if self.attempt.moves_used >= self.level.move_limit {
            self.attempt.status = StageStatus::OutOfMoves;
            events.push(Emitted::new(EventType::Lose).with("reason", "out_of_moves"));
        }
        Ok(MoveOutcome::Accepted(events))
    }

    pub fn restart(&mut self) -> Result<(), GameError> {
        self.attempt.restart()?;
        self.piece_positions = self.level.initial_positions();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(cols: u8, a: u8, b: u8) -> GroupSwapLevel {
        GroupSwapLevel {
            stage_id: GroupSwapStage::Tutorial,
            rows: 1,
            cols,
            group_a_cells: vec![GridPos::new(0, a)],
            group_b_cells: vec![GridPos::new(0, b)],
            move_limit: 10,
            time_limit_s: 60,
            tutorial: String::new(),
        }
    }

    #[test]
    fn step_into_empty_cell_is_accepted() {
        let mut s = GroupSwapState::new(line(3, 0, 2));
        let out = s.apply(SwapMove { piece: 0, target: GridPos::new(0, 1) }).unwrap();
        assert!(out.is_accepted());
        assert_eq!(s.moves_used(), 1);
    }

    #[test]
    fn step_into_occupied_cell_is_ignored() {
        let mut s = GroupSwapState::new(line(2, 0, 1));
        let before = s.clone();
        let out = s.apply(SwapMove { piece: 0, target: GridPos::new(0, 1) }).unwrap();
        assert_eq!(out, MoveOutcome::Rejected(Rejection::Occupied));
        assert_eq!(s, before);
    }

    #[test]
    fn diagonal_and_long_steps_are_refused() {
        let mut s = GroupSwapState::new(line(4, 0, 3));
        let out = s.apply(SwapMove { piece: 0, target: GridPos::new(0, 2) }).unwrap();
        assert_eq!(out, MoveOutcome::Rejected(Rejection::NotAdjacent));
        let out = s.apply(SwapMove { piece: 9, target: GridPos::new(0, 1) }).unwrap();
        assert_eq!(out, MoveOutcome::Rejected(Rejection::UnknownPiece));
    }

    #[test]
    fn initial_state_is_not_solved() {
        let s = GroupSwapState::new(line(3, 0, 2));
        assert!(!s.is_solved());
    }

    #[test]
    fn exchanged_groups_are_solved() {
        let mut s = GroupSwapState::new(line(3, 0, 2));
        s.piece_positions = vec![GridPos::new(0, 2), GridPos::new(0, 0)];
        assert!(s.is_solved());
    }

    #[test]
    fn enumerated_one_by_four_configurations() {
        // Only the configuration with A on B's start and B on A's start wins.
        let level = line(4, 0, 3);
        let mut wins = 0;
        for a in 0..4u8 {
            for b in 0..4u8 {
                if a == b {
                    continue;
                }
                let pos = vec![GridPos::new(0, a), GridPos::new(0, b)];
                let solved = level.is_swapped(&pos);
                assert_eq!(solved, a == 3 && b == 0);
                wins += usize::from(solved);
            }
        }
        assert_eq!(wins, 1);
    }

    #[test]
    fn move_on_terminal_state_is_an_error() {
        let mut s = GroupSwapState::new(line(3, 0, 2));
        s.attempt.status = StageStatus::Surrendered;
        assert!(matches!(
            s.apply(SwapMove { piece: 0, target: GridPos::new(0, 1) }),
            Err(GameError::NotPlaying(_))
        ));
    }

    #[test]
    fn exhausting_the_move_budget_ends_the_attempt() {
        let mut level = line(3, 0, 2);
        level.move_limit = 1;
        let mut s = GroupSwapState::new(level);
        s.apply(SwapMove { piece: 0, target: GridPos::new(0, 1) }).unwrap();
        assert_eq!(s.status(), StageStatus::OutOfMoves);
        s.restart().unwrap();
        assert_eq!(s.status(), StageStatus::Playing);
        assert_eq!(s.moves_used(), 0);
        assert_eq!(s.attempt.restarts, 1);
    }
}
