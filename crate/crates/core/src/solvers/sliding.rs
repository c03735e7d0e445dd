use crate::game::sliding::{SlideMove, SlidingPathLevel};
use crate::game::{Direction, GridPos};

use super::{bfs, iddfs, Puzzle, SolveError, SolveResult};

/// State space of a sliding-path level: one anchor per block.
pub struct SlidingPuzzle<'a> {
    level: &'a SlidingPathLevel,
    start: Vec<GridPos>,
}

impl<'a> SlidingPuzzle<'a> {
    pub fn new(level: &'a SlidingPathLevel) -> Result<Self, SolveError> {
        level.validate()?;
        Ok(SlidingPuzzle { level, start: level.initial_anchors() })
    }

    pub fn from_anchors(level: &'a SlidingPathLevel, anchors: &[GridPos]) -> Result<Self, SolveError> {
        let mut p = Self::new(level)?;
        p.start = anchors.to_vec();
        Ok(p)
    }
}

impl Puzzle for SlidingPuzzle<'_> {
    type State = Vec<GridPos>;
    type Key = Vec<GridPos>;
    type Move = SlideMove;

    fn initial(&self) -> Vec<GridPos> {
        self.start.clone()
    }

    fn key(&self, s: &Vec<GridPos>) -> Vec<GridPos> {
        s.clone()
    }

    fn is_goal(&self, s: &Vec<GridPos>) -> bool {
        self.level.is_goal(s)
    }

    fn successors(&self, s: &Vec<GridPos>) -> Vec<(SlideMove, Vec<GridPos>)> {
        let occ = self.level.occupancy(s);
        let mut out = Vec::new();
        for idx in 0..self.level.blocks.len() {
            for dir in Direction::ALL {
                let max = self.level.max_slide(s, &occ, idx, dir);
                let (dr, dc) = dir.delta();
                for cells in 1..=max {
                    let a = s[idx];
                    let k = i16::from(cells);
                    let mut next = s.clone();
                    next[idx] = GridPos::new(
                        (i16::from(a.row) + i16::from(dr) * k) as u8,
                        (i16::from(a.col) + i16::from(dc) * k) as u8,
                    );
                    out.push((SlideMove { block: idx as u8, direction: dir, cells }, next));
                }
            }
        }
        out.sort_by_key(|a| a.0);
        out
    }
}

pub fn solve_sliding(level: &SlidingPathLevel, cap: usize) -> Result<SolveResult<SlideMove>, SolveError> {
    bfs(&SlidingPuzzle::new(level)?, cap)
}

pub fn solve_sliding_iddfs(level: &SlidingPathLevel, cap: usize) -> Result<SolveResult<SlideMove>, SolveError> {
    iddfs(&SlidingPuzzle::new(level)?, cap)
}
