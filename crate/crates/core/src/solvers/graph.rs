use crate::game::graph::GraphLevel;
use crate::game::{Direction, GridPos};

use super::{bfs, iddfs, Puzzle, SolveError, SolveResult};

pub const MAX_GRAPH_CELLS: usize = 64;

/// Graph traversal state: visited bitmask over grid cells plus the current
/// cell.
pub struct GraphPuzzle<'a> {
    level: &'a GraphLevel,
    all: u64,
    start: (u64, GridPos),
}

impl<'a> GraphPuzzle<'a> {
    pub fn new(level: &'a GraphLevel) -> Result<Self, SolveError> {
        level.validate()?;
        let cells = usize::from(level.rows) * usize::from(level.cols);
        if cells > MAX_GRAPH_CELLS {
            return Err(SolveError::TooLarge(format!("{cells} grid cells (max {MAX_GRAPH_CELLS})")));
        }
        let all = level.nodes.iter().fold(0, |m, &p| m | bit(level, p));
        Ok(GraphPuzzle { level, all, start: (bit(level, level.start), level.start) })
    }

    /// Resumes from a partial path (must start at the level's start node).
    pub fn from_path(level: &'a GraphLevel, visited: &[GridPos]) -> Result<Self, SolveError> {
        let mut p = Self::new(level)?;
        let mask = visited.iter().fold(0, |m, &q| m | bit(level, q));
        p.start = (mask, *visited.last().unwrap_or(&level.start));
        Ok(p)
    }

    /// Search state for a partial path.
    pub fn state_of(&self, visited: &[GridPos]) -> (u64, GridPos) {
        let mask = visited.iter().fold(0, |m, &q| m | bit(self.level, q));
        (mask, *visited.last().unwrap_or(&self.level.start))
    }
}

fn bit(level: &GraphLevel, p: GridPos) -> u64 {
    1u64 << (usize::from(p.row) * usize::from(level.cols) + usize::from(p.col))
}

impl Puzzle for GraphPuzzle<'_> {
    type State = (u64, GridPos);
    type Key = (u64, GridPos);
    type Move = Direction;

    fn initial(&self) -> (u64, GridPos) {
        self.start
    }

    fn key(&self, s: &(u64, GridPos)) -> (u64, GridPos) {
        *s
    }

    fn is_goal(&self, s: &(u64, GridPos)) -> bool {
        s.0 == self.all
    }

    fn successors(&self, &(mask, cur): &(u64, GridPos)) -> Vec<(Direction, (u64, GridPos))> {
        let mut out = Vec::new();
        for d in Direction::ALL {
            let mut m = mask;
            let mut at = cur;
            while let Some(next) = at.step(d, self.level.rows, self.level.cols) {
                if !self.level.nodes.contains(&next) || m & bit(self.level, next) != 0 {
                    break;
                }
                m |= bit(self.level, next);
                at = next;
            }
            if at != cur {
                out.push((d, (m, at)));
            }
        }
        out
    }
}

/// Backtracking search over direction sequences with iterative deepening,
/// so the witness uses the fewest moves.
pub fn solve_graph(level: &GraphLevel, cap: usize) -> Result<SolveResult<Direction>, SolveError> {
    iddfs(&GraphPuzzle::new(level)?, cap)
}

/// Breadth-first cross-check of [`solve_graph`].
pub fn solve_graph_bfs(level: &GraphLevel, cap: usize) -> Result<SolveResult<Direction>, SolveError> {
    bfs(&GraphPuzzle::new(level)?, cap)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::game::graph::GraphState;
    use crate::game::StageStatus;
    use crate::solvers::DEFAULT_STATE_CAP;

    fn level(cells: &[(u8, u8)], rows: u8, cols: u8, start: (u8, u8)) -> GraphLevel {
        GraphLevel {
            stage_id: 1,
            rows,
            cols,
            nodes: cells.iter().map(|&(r, c)| GridPos::new(r, c)).collect(),
            obstacles: BTreeSet::new(),
            start: GridPos::new(start.0, start.1),
            time_limit_s: 60,
            tutorial: String::new(),
        }
    }

    /// Every direction sequence up to `depth`, replayed through the engine.
    fn enumerate_wins(l: &GraphLevel, depth: usize) -> Vec<Vec<Direction>> {
        let mut wins = Vec::new();
        let mut stack = vec![Vec::new()];
        while let Some(seq) = stack.pop() {
            let mut s = GraphState::new(l.clone());
            let mut ok = true;
            for &d in &seq {
                if s.status() != StageStatus::Playing || !matches!(s.apply(d), Ok(Ok(_))) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            if s.status() == StageStatus::Won {
                wins.push(seq);
                continue;
            }
            if seq.len() < depth {
                for d in Direction::ALL {
                    let mut next = seq.clone();
                    next.push(d);
                    stack.push(next);
                }
            }
        }
        wins
    }

    #[test]
    fn line_from_end_is_one_move() {
        let l = level(&[(0, 0), (0, 1), (0, 2)], 1, 3, (0, 0));
        let r = solve_graph(&l, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(r.witness, vec![Direction::Right]);
    }

    #[test]
    fn square_from_corner_needs_three_moves() {
        let l = level(&[(0, 0), (0, 1), (1, 0), (1, 1)], 2, 2, (0, 0));
        let r = solve_graph(&l, DEFAULT_STATE_CAP).unwrap();
        let wins = enumerate_wins(&l, 4);
        let shortest = wins.iter().map(Vec::len).min().unwrap();
        assert_eq!(shortest, 3);
        assert_eq!(r.optimal_moves, Some(3));
        assert!(wins.contains(&vec![Direction::Right, Direction::Down, Direction::Left]));
    }

    #[test]
    fn plus_shape_from_center_is_unsolvable() {
        let l = level(&[(1, 1), (0, 1), (2, 1), (1, 0), (1, 2)], 3, 3, (1, 1));
        assert!(enumerate_wins(&l, 6).is_empty());
        assert!(!solve_graph(&l, DEFAULT_STATE_CAP).unwrap().solvable);
        assert!(!solve_graph_bfs(&l, DEFAULT_STATE_CAP).unwrap().solvable);
    }
}
