//! Exhaustive-search solvers establishing solvability and optimal move
//! counts for puzzle levels.
//!
//! Two independent searches are provided over a common [`Puzzle`] model:
//! breadth-first search and iterative-deepening depth-first search. Level
//! validation uses one and the test suites cross-check it against the other.

pub mod distance;
pub mod graph;
pub mod groupswap;
pub mod sliding;
pub mod validate;

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on expanded states per level.
pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("state space exceeds the cap of {cap} expanded states")]
    Capacity { cap: usize },
    #[error("level too large to solve: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Level(#[from] crate::game::GameError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult<M> {
    pub solvable: bool,
    pub optimal_moves: Option<u32>,
    pub witness: Vec<M>,
    pub states_expanded: u64,
}

impl<M> SolveResult<M> {
    fn unsolvable(states_expanded: u64) -> Self {
        SolveResult { solvable: false, optimal_moves: None, witness: Vec::new(), states_expanded }
    }

    fn solved(witness: Vec<M>, states_expanded: u64) -> Self {
        SolveResult { solvable: true, optimal_moves: Some(witness.len() as u32), witness, states_expanded }
    }
}

/// A deterministic single-player puzzle as a state graph.
pub trait Puzzle {
    type State: Clone;
    type Key: Clone + Eq + Hash;
    type Move: Clone;

    fn initial(&self) -> Self::State;
    fn key(&self, state: &Self::State) -> Self::Key;
    fn is_goal(&self, state: &Self::State) -> bool;
    /// Successors in deterministic (lexicographic) move order.
    fn successors(&self, state: &Self::State) -> Vec<(Self::Move, Self::State)>;
}

/// Breadth-first search; the first goal dequeued is move-optimal.
pub fn bfs<P: Puzzle>(puzzle: &P, cap: usize) -> Result<SolveResult<P::Move>, SolveError> {
    let start = puzzle.initial();
    if puzzle.is_goal(&start) {
        return Ok(SolveResult::solved(Vec::new(), 0));
    }
    // Parent links: node index -> (parent index, move into node).
    let mut nodes: Vec<(usize, Option<P::Move>)> = vec![(usize::MAX, None)];
    let mut seen: HashMap<P::Key, ()> = HashMap::new();
    seen.insert(puzzle.key(&start), ());
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut expanded = 0u64;
    while let Some((state, idx)) = queue.pop_front() {
        expanded += 1;
        if expanded as usize > cap {
            return Err(SolveError::Capacity { cap });
        }
        for (mv, next) in puzzle.successors(&state) {
            let key = puzzle.key(&next);
            if seen.contains_key(&key) {
                continue;
            }
            seen.insert(key, ());
            nodes.push((idx, Some(mv)));
            let child = nodes.len() - 1;
            if puzzle.is_goal(&next) {
                return Ok(SolveResult::solved(unwind(&nodes, child), expanded));
            }
            queue.push_back((next, child));
        }
    }
    Ok(SolveResult::unsolvable(expanded))
}

fn unwind<M: Clone>(nodes: &[(usize, Option<M>)], mut idx: usize) -> Vec<M> {
    let mut path = Vec::new();
    while let (parent, Some(mv)) = &nodes[idx] {
        path.push(mv.clone());
        idx = *parent;
    }
    path.reverse();
    path
}

/// Iterative-deepening depth-first search with a transposition table that
/// remembers the largest remaining budget each state was explored with.
pub fn iddfs<P: Puzzle>(puzzle: &P, cap: usize) -> Result<SolveResult<P::Move>, SolveError> {
    struct Search<'a, P: Puzzle> {
        puzzle: &'a P,
        table: HashMap<P::Key, u32>,
        expanded: u64,
        cap: usize,
        path: Vec<P::Move>,
    }

    impl<P: Puzzle> Search<'_, P> {
        fn dfs(&mut self, state: &P::State, budget: u32) -> Result<bool, SolveError> {
            if self.puzzle.is_goal(state) {
                return Ok(true);
            }
            if budget == 0 {
                return Ok(false);
            }
            self.expanded += 1;
            if self.expanded as usize > self.cap {
                return Err(SolveError::Capacity { cap: self.cap });
            }
            for (mv, next) in self.puzzle.successors(state) {
                let key = self.puzzle.key(&next);
                match self.table.get(&key) {
                    Some(&b) if b >= budget - 1 => continue,
                    _ => {}
                }
                self.table.insert(key, budget - 1);
                self.path.push(mv);
                if self.dfs(&next, budget - 1)? {
                    return Ok(true);
                }
                self.path.pop();
            }
            Ok(false)
        }
    }

    let start = puzzle.initial();
    let mut search = Search { puzzle, table: HashMap::new(), expanded: 0, cap, path: Vec::new() };
    let mut last_reach = 0usize;
    for depth in 0.. {
        search.table.clear();
        search.table.insert(puzzle.key(&start), depth);
        search.path.clear();
        if search.dfs(&start, depth)? {
            let witness = std::mem::take(&mut search.path);
            return Ok(SolveResult::solved(witness, search.expanded));
        }
        // No new states reachable with a larger budget: the goal is unreachable.
        let reach = search.table.len();
        if depth > 0 && reach == last_reach {
            return Ok(SolveResult::unsolvable(search.expanded));
        }
        last_reach = reach;
    }
    unreachable!()
}
