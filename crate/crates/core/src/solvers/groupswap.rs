use crate::game::groupswap::{GroupSwapLevel, SwapMove};
use crate::game::{Direction, GridPos};

use super::{bfs, iddfs, Puzzle, SolveError, SolveResult};

/// State space of a group-swap level. Pieces within a group are
/// interchangeable for the goal, so states are keyed by the two occupancy
/// bitmasks.
pub struct GroupSwapPuzzle<'a> {
    level: &'a GroupSwapLevel,
    start: Vec<GridPos>,
    goal: (u64, u64),
}

impl<'a> GroupSwapPuzzle<'a> {
    pub fn new(level: &'a GroupSwapLevel) -> Result<Self, SolveError> {
        level.validate()?;
        if level.cell_count() > 64 {
            return Err(SolveError::TooLarge(format!("{} cells (max 64)", level.cell_count())));
        }
        let goal = (mask(level, &level.group_b_cells), mask(level, &level.group_a_cells));
        Ok(GroupSwapPuzzle { level, start: level.initial_positions(), goal })
    }

    /// Starts the search from an arbitrary mid-game position.
    pub fn from_positions(level: &'a GroupSwapLevel, positions: &[GridPos]) -> Result<Self, SolveError> {
        let mut p = Self::new(level)?;
        p.start = positions.to_vec();
        Ok(p)
    }
}

fn bit(level: &GroupSwapLevel, p: GridPos) -> u64 {
    1u64 << (usize::from(p.row) * usize::from(level.cols) + usize::from(p.col))
}

fn mask(level: &GroupSwapLevel, cells: &[GridPos]) -> u64 {
    cells.iter().fold(0, |m, &p| m | bit(level, p))
}

impl Puzzle for GroupSwapPuzzle<'_> {
    type State = Vec<GridPos>;
    type Key = (u64, u64);
    type Move = SwapMove;

    fn initial(&self) -> Vec<GridPos> {
        self.start.clone()
    }

    fn key(&self, s: &Vec<GridPos>) -> (u64, u64) {
        let n = self.level.group_size();
        (mask(self.level, &s[..n]), mask(self.level, &s[n..]))
    }

    fn is_goal(&self, s: &Vec<GridPos>) -> bool {
        self.key(s) == self.goal
    }

    fn successors(&self, s: &Vec<GridPos>) -> Vec<(SwapMove, Vec<GridPos>)> {
        let occupied = s.iter().fold(0u64, |m, &p| m | bit(self.level, p));
        let mut out = Vec::new();
        for (i, &p) in s.iter().enumerate() {
            for d in Direction::ALL {
                if let Some(t) = p.step(d, self.level.rows, self.level.cols) {
                    if occupied & bit(self.level, t) == 0 {
                        let mut next = s.clone();
                        next[i] = t;
                        out.push((SwapMove { piece: i as u8, target: t }, next));
                    }
                }
            }
        }
        out.sort_by_key(|a| a.0);
        out
    }
}

/// Move-optimal solution by breadth-first search.
pub fn solve_groupswap(level: &GroupSwapLevel, cap: usize) -> Result<SolveResult<SwapMove>, SolveError> {
    bfs(&GroupSwapPuzzle::new(level)?, cap)
}

/// Iterative-deepening cross-check of [`solve_groupswap`].
pub fn solve_groupswap_iddfs(level: &GroupSwapLevel, cap: usize) -> Result<SolveResult<SwapMove>, SolveError> {
    iddfs(&GroupSwapPuzzle::new(level)?, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::groupswap::{GroupSwapStage, GroupSwapState, MoveOutcome};
    use crate::game::StageStatus;
    use crate::solvers::DEFAULT_STATE_CAP;

    fn level(rows: u8, cols: u8, a: &[(u8, u8)], b: &[(u8, u8)]) -> GroupSwapLevel {
        GroupSwapLevel {
            stage_id: GroupSwapStage::Tutorial,
            rows,
            cols,
            group_a_cells: a.iter().map(|&(r, c)| GridPos::new(r, c)).collect(),
            group_b_cells: b.iter().map(|&(r, c)| GridPos::new(r, c)).collect(),
            move_limit: 100,
            time_limit_s: 60,
            tutorial: String::new(),
        }
    }

    #[test]
    fn no_empty_cell_means_unsolvable() {
        let l = level(1, 2, &[(0, 0)], &[(0, 1)]);
        let r = solve_groupswap(&l, DEFAULT_STATE_CAP).unwrap();
        assert!(!r.solvable);
        assert_eq!(r.optimal_moves, None);
    }

    #[test]
    fn single_row_cannot_pass_pieces() {
        // A 1x4 row with one piece per group: pieces can never pass each other.
        let l = level(1, 4, &[(0, 0)], &[(0, 3)]);
        let bfs = solve_groupswap(&l, DEFAULT_STATE_CAP).unwrap();
        let id = solve_groupswap_iddfs(&l, DEFAULT_STATE_CAP).unwrap();
        assert!(!bfs.solvable);
        assert!(!id.solvable);
    }

    #[test]
    fn two_by_three_swap_is_optimal_and_replays() {
        let l = level(2, 3, &[(0, 0)], &[(0, 2)]);
        let bfs = solve_groupswap(&l, DEFAULT_STATE_CAP).unwrap();
        let id = solve_groupswap_iddfs(&l, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(bfs.optimal_moves, id.optimal_moves);
        let mut s = GroupSwapState::new(l);
        for mv in &bfs.witness {
            assert!(matches!(s.apply(*mv).unwrap(), MoveOutcome::Accepted(_)));
        }
        assert_eq!(s.status(), StageStatus::Won);
        assert_eq!(Some(s.moves_used()), bfs.optimal_moves);
    }

    #[test]
    fn expansion_count_is_reproducible() {
        let l = level(3, 3, &[(0, 0), (1, 0)], &[(0, 2), (1, 2)]);
        let a = solve_groupswap(&l, DEFAULT_STATE_CAP).unwrap();
        let b = solve_groupswap(&l, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(a, b);
    }
}
