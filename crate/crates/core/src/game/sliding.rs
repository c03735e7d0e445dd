//! Obstacle-rearrangement path puzzle: slide blocks so the target block
//! covers the endpoint cell.
//!
//! One move displaces one block any number of cells in one direction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::groupswap::MoveOutcome;
use super::{Attempt, Direction, GameError, GridPos, Rejection, StageStatus};
use crate::telemetry::event::{Emitted, EventType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockShape {
    Cell1x1,
    /// One column, two rows.
    Vert1x2,
    /// One row, two columns.
    Horiz2x1,
    Square2x2,
}

impl BlockShape {
    /// `(height, width)` in cells.
    pub fn dims(self) -> (u8, u8) {
        match self {
            BlockShape::Cell1x1 => (1, 1),
            BlockShape::Vert1x2 => (2, 1),
            BlockShape::Horiz2x1 => (1, 2),
            BlockShape::Square2x2 => (2, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MovementAxis {
    Horizontal,
    Vertical,
    Both,
    Fixed,
}

impl MovementAxis {
    pub fn allows(self, dir: Direction) -> bool {
        match self {
            MovementAxis::Both => true,
            MovementAxis::Fixed => false,
            MovementAxis::Horizontal => dir.is_horizontal(),
            MovementAxis::Vertical => !dir.is_horizontal(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    pub shape: BlockShape,
    pub anchor: GridPos,
    pub movement_axis: MovementAxis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlidingPathLevel {
    pub stage_id: u8,
    pub rows: u8,
    pub cols: u8,
    pub blocks: Vec<Block>,
    pub target_block_id: String,
    pub endpoint: GridPos,
    pub move_limit: u32,
    pub time_limit_s: u32,
    #[serde(default)]
    pub tutorial: String,
}

/// Cells covered by a block of `shape` anchored (top-left) at `anchor`.
pub fn footprint(shape: BlockShape, anchor: GridPos) -> impl Iterator<Item = (i16, i16)> {
    let (h, w) = shape.dims();
    (0..h).flat_map(move |dr| (0..w).map(move |dc| (i16::from(anchor.row + dr), i16::from(anchor.col + dc))))
}

impl SlidingPathLevel {
    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: String| Err(GameError::InvalidLevel(format!("sliding_path stage {}: {m}", self.stage_id)));
        if !(1..=3).contains(&self.stage_id) {
            return bad("stage_id must be 1..3".into());
        }
        if !self.endpoint.in_bounds(self.rows, self.cols) {
            return bad("endpoint out of bounds".into());
        }
        if self.blocks.iter().filter(|b| b.id == self.target_block_id).count() != 1 {
            return bad("exactly one target block required".into());
        }
        if self.move_limit == 0 || self.time_limit_s == 0 {
            return bad("move_limit and time_limit_s must be positive".into());
        }
        let mut ids = BTreeSet::new();
        let mut cells = BTreeSet::new();
        for b in &self.blocks {
            if !ids.insert(b.id.as_str()) {
                return bad(format!("duplicate block id `{}`", b.id));
            }
            for (r, c) in footprint(b.shape, b.anchor) {
                if r >= i16::from(self.rows) || c >= i16::from(self.cols) {
                    return bad(format!("block `{}` out of bounds", b.id));
                }
                if !cells.insert((r, c)) {
                    return bad(format!("block `{}` overlaps another block", b.id));
                }
            }
        }
        Ok(())
    }

    pub fn target_index(&self) -> usize {
        self.blocks.iter().position(|b| b.id == self.target_block_id).unwrap_or(0)
    }

    pub fn initial_anchors(&self) -> Vec<GridPos> {
        self.blocks.iter().map(|b| b.anchor).collect()
    }

    pub fn is_goal(&self, anchors: &[GridPos]) -> bool {
        let t = self.target_index();
        let goal = (i16::from(self.endpoint.row), i16::from(self.endpoint.col));
        footprint(self.blocks[t].shape, anchors[t]).any(|c| c == goal)
    }

    /// Occupancy bitmap for `anchors`, row-major.
    pub fn occupancy(&self, anchors: &[GridPos]) -> Vec<bool> {
        let mut grid = vec![false; usize::from(self.rows) * usize::from(self.cols)];
        for (b, &a) in self.blocks.iter().zip(anchors) {
            for (r, c) in footprint(b.shape, a) {
                grid[r as usize * usize::from(self.cols) + c as usize] = true;
            }
        }
        grid
    }

    /// Furthest legal displacement of block `idx` in `dir`, 0 if blocked.
    pub fn max_slide(&self, anchors: &[GridPos], occupancy: &[bool], idx: usize, dir: Direction) -> u8 {
        let block = &self.blocks[idx];
        if !block.movement_axis.allows(dir) {
            return 0;
        }
        let (h, w) = block.shape.dims();
        let a = anchors[idx];
        let (dr, dc) = dir.delta();
        let mut n = 0u8;
        loop {
            let k = i16::from(n) + 1;
            let top = i16::from(a.row) + i16::from(dr) * k;
            let left = i16::from(a.col) + i16::from(dc) * k;
            if top < 0 || left < 0 || top + i16::from(h) > i16::from(self.rows) || left + i16::from(w) > i16::from(self.cols) {
                return n;
            }
            // Only the leading edge enters new cells.
            let blocked = (0..h).any(|r| {
                (0..w).any(|c| {
                    let rr = top + i16::from(r);
                    let cc = left + i16::from(c);
                    let own = rr >= i16::from(a.row)
                        && rr < i16::from(a.row + h)
                        && cc >= i16::from(a.col)
                        && cc < i16::from(a.col + w);
                    !own && occupancy[rr as usize * usize::from(self.cols) + cc as usize]
                })
            });
            if blocked {
                return n;
            }
            n += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlideMove {
    pub block: u8,
    pub direction: Direction,
    pub cells: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlidingState {
    pub level: SlidingPathLevel,
    pub anchors: Vec<GridPos>,
    pub attempt: Attempt,
}

impl SlidingState {
    pub fn new(level: SlidingPathLevel) -> Self {
        let anchors = level.initial_anchors();
        let attempt = Attempt::new(level.time_limit_s);
        SlidingState { level, anchors, attempt }
    }

    pub fn status(&self) -> StageStatus {
        self.attempt.status
    }

    pub fn moves_used(&self) -> u32 {
        self.attempt.moves_used
    }

    pub fn block_index(&self, id: &str) -> Option<usize> {
        self.level.blocks.iter().position(|b| b.id == id)
    }

    pub fn is_solved(&self) -> bool {
        self.level.is_goal(&self.anchors)
    }

    /// All accepted moves in lexicographic order.
    pub fn legal_moves(&self) -> Vec<SlideMove> {
        let occ = self.level.occupancy(&self.anchors);
        let mut out = Vec::new();
        for idx in 0..self.level.blocks.len() {
            for dir in Direction::ALL {
                let max = self.level.max_slide(&self.anchors, &occ, idx, dir);
                for cells in 1..=max {
                    out.push(SlideMove { block: idx as u8, direction: dir, cells });
                }
            }
        }
        out.sort();
        out
    }

    /// Slides the block named `block_id`.
    pub fn apply_by_id(&mut self, block_id: &str, direction: Direction, cells: u8) -> Result<MoveOutcome, GameError> {
        let idx = self.block_index(block_id).ok_or_else(|| GameError::UnknownBlock(block_id.to_owned()))?;
        self.apply(SlideMove { block: idx as u8, direction, cells })
    }

    pub fn apply(&mut self, mv: SlideMove) -> Result<MoveOutcome, GameError> {
        self.attempt.ensure_playing()?;
        let idx = usize::from(mv.block);
        let Some(block) = self.level.blocks.get(idx) else {
            return Err(GameError::UnknownBlock(mv.block.to_string()));
        };
        if mv.cells == 0 {
            return Ok(MoveOutcome::Rejected(Rejection::NoAdvance));
        }
        if !block.movement_axis.allows(mv.direction) {
            return Ok(MoveOutcome::Rejected(Rejection::AxisLocked));
        }
        let occ = self.level.occupancy(&self.anchors);
        let max = self.level.max_slide(&self.anchors, &occ, idx, mv.direction);
        if mv.cells > max {
            return Ok(MoveOutcome::Rejected(Rejection::Occupied));
        }
        let (dr, dc) = mv.direction.delta();
        let a = self.anchors[idx];
        let k = mv.cells as i16;
        let to = GridPos::new((i16::from(a.row) + i16::from(dr) * k) as u8, (i16::from(a.col) + i16::from(dc) * k) as u8);
        self.anchors[idx] = to;
        self.attempt.moves_used += 1;
        let mut events = vec![Emitted::new(EventType::MoveAccepted)
            .with("block", block.id.as_str())
            .with("direction", mv.direction.as_str())
            .with("cells", i64::from(mv.cells))
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
        self.anchors = self.level.initial_anchors();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(id: &str, shape: BlockShape, r: u8, c: u8, axis: MovementAxis) -> Block {
        Block { id: id.into(), shape, anchor: GridPos::new(r, c), movement_axis: axis }
    }

    fn level(blocks: Vec<Block>) -> SlidingPathLevel {
        SlidingPathLevel {
            stage_id: 1,
            rows: 3,
            cols: 3,
            blocks,
            target_block_id: "t".into(),
            endpoint: GridPos::new(0, 2),
            move_limit: 20,
            time_limit_s: 60,
            tutorial: String::new(),
        }
    }

    #[test]
    fn horizontal_block_cannot_move_vertically() {
        let mut s = SlidingState::new(level(vec![
            block("t", BlockShape::Cell1x1, 0, 0, MovementAxis::Both),
            block("h", BlockShape::Horiz2x1, 1, 0, MovementAxis::Horizontal),
        ]));
        let out = s.apply_by_id("h", Direction::Down, 1).unwrap();
        assert_eq!(out, MoveOutcome::Rejected(Rejection::AxisLocked));
        assert_eq!(s.moves_used(), 0);
    }

    #[test]
    fn single_cell_slides_into_free_cell() {
        let mut s = SlidingState::new(level(vec![block("t", BlockShape::Cell1x1, 0, 0, MovementAxis::Both)]));
        let out = s.apply_by_id("t", Direction::Right, 1).unwrap();
        assert!(out.is_accepted());
        assert_eq!(s.anchors[0], GridPos::new(0, 1));
    }

    #[test]
    fn slide_stops_at_obstacles_and_wins_on_endpoint() {
        let mut s = SlidingState::new(level(vec![
            block("t", BlockShape::Cell1x1, 0, 0, MovementAxis::Both),
            block("v", BlockShape::Vert1x2, 0, 1, MovementAxis::Vertical),
        ]));
        assert_eq!(s.apply_by_id("t", Direction::Right, 2).unwrap(), MoveOutcome::Rejected(Rejection::Occupied));
        assert!(s.apply_by_id("v", Direction::Down, 1).unwrap().is_accepted());
        assert!(s.apply_by_id("t", Direction::Right, 2).unwrap().is_accepted());
        assert_eq!(s.status(), StageStatus::Won);
    }

    #[test]
    fn unknown_block_is_an_input_error() {
        let mut s = SlidingState::new(level(vec![block("t", BlockShape::Cell1x1, 0, 0, MovementAxis::Both)]));
        assert!(matches!(s.apply_by_id("zz", Direction::Left, 1), Err(GameError::UnknownBlock(_))));
    }

    #[test]
    fn overlapping_blocks_fail_validation() {
        let l = level(vec![
            block("t", BlockShape::Square2x2, 0, 0, MovementAxis::Both),
            block("x", BlockShape::Cell1x1, 1, 1, MovementAxis::Fixed),
        ]);
        assert!(l.validate().is_err());
    }

    #[test]
    fn square_block_slides_as_a_unit() {
        let mut l = level(vec![block("t", BlockShape::Square2x2, 0, 0, MovementAxis::Both)]);
        l.endpoint = GridPos::new(2, 2);
        let mut s = SlidingState::new(l);
        assert_eq!(s.apply_by_id("t", Direction::Right, 2).unwrap(), MoveOutcome::Rejected(Rejection::Occupied));
        assert!(s.apply_by_id("t", Direction::Down, 1).unwrap().is_accepted());
        assert!(s.apply_by_id("t", Direction::Right, 1).unwrap().is_accepted());
        assert!(s.is_solved());
    }
}
