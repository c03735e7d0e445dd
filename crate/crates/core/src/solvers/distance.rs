use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use super::{Puzzle, SolveError};

/// Moves-to-goal for every state reachable from a puzzle's initial state.
/// Dead ends (no path to a goal) are absent.
#[derive(Debug, Clone)]
pub struct DistanceMap<K: Eq + Hash> {
    dist: HashMap<K, u32>,
    reachable: usize,
}

impl<K: Eq + Hash> DistanceMap<K> {
    pub fn get(&self, key: &K) -> Option<u32> {
        self.dist.get(key).copied()
    }

    pub fn reachable_states(&self) -> usize {
        self.reachable
    }

    pub fn solvable_states(&self) -> usize {
        self.dist.len()
    }
}

/// Explores the reachable state graph, then runs a multi-source backward
/// search from every goal state.
pub fn distance_map<P: Puzzle>(puzzle: &P, cap: usize) -> Result<DistanceMap<P::Key>, SolveError> {
    let start = puzzle.initial();
    let mut index: HashMap<P::Key, usize> = HashMap::new();
    let mut keys: Vec<P::Key> = Vec::new();
    let mut preds: Vec<Vec<usize>> = Vec::new();
    let mut goals = Vec::new();
    let mut queue = VecDeque::new();

    index.insert(puzzle.key(&start), 0);
    keys.push(puzzle.key(&start));
    preds.push(Vec::new());
    queue.push_back((start, 0usize));
    while let Some((state, i)) = queue.pop_front() {
        if keys.len() > cap {
            return Err(SolveError::Capacity { cap });
        }
        if puzzle.is_goal(&state) {
            goals.push(i);
            continue;
        }
        for (_, next) in puzzle.successors(&state) {
            let k = puzzle.key(&next);
            let j = match index.get(&k) {
                Some(&j) => j,
                None => {
                    let j = keys.len();
                    index.insert(k.clone(), j);
                    keys.push(k);
                    preds.push(Vec::new());
                    queue.push_back((next, j));
                    j
                }
            };
            preds[j].push(i);
        }
    }

    let mut d = vec![u32::MAX; keys.len()];
    let mut back: VecDeque<usize> = VecDeque::new();
    for &g in &goals {
        d[g] = 0;
        back.push_back(g);
    }
    while let Some(j) = back.pop_front() {
        for &i in &preds[j] {
            if d[i] == u32::MAX {
                d[i] = d[j] + 1;
                back.push_back(i);
            }
        }
    }
    let reachable = keys.len();
    let dist = keys.into_iter().zip(d).filter(|&(_, v)| v != u32::MAX).collect();
    Ok(DistanceMap { dist, reachable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::LevelPack;
    use crate::solvers::graph::{solve_graph, GraphPuzzle};
    use crate::solvers::groupswap::{solve_groupswap, GroupSwapPuzzle};
    use crate::solvers::sliding::{solve_sliding, SlidingPuzzle};
    use crate::solvers::DEFAULT_STATE_CAP;

    #[test]
    fn start_distance_is_the_optimum_on_shipped_levels() {
        let pack = LevelPack::default_pack();
        for l in &pack.group_swap {
            let p = GroupSwapPuzzle::new(l).unwrap();
            let m = distance_map(&p, DEFAULT_STATE_CAP).unwrap();
            assert_eq!(m.get(&p.key(&p.initial())), solve_groupswap(l, DEFAULT_STATE_CAP).unwrap().optimal_moves);
        }
        for l in &pack.sliding_path {
            let p = SlidingPuzzle::new(l).unwrap();
            let m = distance_map(&p, DEFAULT_STATE_CAP).unwrap();
            assert_eq!(m.get(&p.key(&p.initial())), solve_sliding(l, DEFAULT_STATE_CAP).unwrap().optimal_moves);
        }
        for l in &pack.graph {
            let p = GraphPuzzle::new(l).unwrap();
            let m = distance_map(&p, DEFAULT_STATE_CAP).unwrap();
            assert_eq!(m.get(&p.key(&p.initial())), solve_graph(l, DEFAULT_STATE_CAP).unwrap().optimal_moves);
        }
    }
}
