//! Random small puzzle levels and solver cross-checks shared by the
//! integration suites.
#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;

use assess_core::game::graph::{GraphLevel, GraphState};
use assess_core::game::groupswap::{GroupSwapLevel, GroupSwapStage, GroupSwapState, MoveOutcome};
use assess_core::game::sliding::{Block, BlockShape, MovementAxis, SlidingPathLevel, SlidingState};
use assess_core::game::{GridPos, StageStatus};
use assess_core::levels::LevelPack;
use assess_core::rng::{self, Rng};
use assess_core::solvers::graph::{solve_graph, solve_graph_bfs};
use assess_core::solvers::groupswap::{solve_groupswap, solve_groupswap_iddfs};
use assess_core::solvers::sliding::{solve_sliding, solve_sliding_iddfs};
use assess_core::solvers::{SolveResult, DEFAULT_STATE_CAP};

/// Move budget large enough never to end a replay early.
const GENEROUS: u32 = 10_000;

fn cells(rows: u8, cols: u8) -> Vec<GridPos> {
    (0..rows).flat_map(|r| (0..cols).map(move |c| GridPos::new(r, c))).collect()
}

pub fn random_groupswap(r: &mut Rng) -> GroupSwapLevel {
    let (rows, cols) = *[(2u8, 3u8), (3, 3), (2, 4), (3, 4)].choose(r).unwrap();
    let mut all = cells(rows, cols);
    all.shuffle(r);
    let max_group = ((all.len() - 1) / 2).min(3);
    let n = r.gen_range(1..=max_group);
    GroupSwapLevel {
        stage_id: GroupSwapStage::Tutorial,
        rows,
        cols,
        group_a_cells: all[..n].to_vec(),
        group_b_cells: all[n..2 * n].to_vec(),
        move_limit: GENEROUS,
        time_limit_s: 600,
        tutorial: String::new(),
    }
}

pub fn random_sliding(r: &mut Rng) -> SlidingPathLevel {
    let (rows, cols) = (r.gen_range(3..=5u8), r.gen_range(3..=5u8));
    let mut taken = BTreeSet::new();
    let mut blocks = Vec::new();
    let want = r.gen_range(1..=4);
    let shapes = [BlockShape::Cell1x1, BlockShape::Vert1x2, BlockShape::Horiz2x1, BlockShape::Square2x2];
    let axes = [MovementAxis::Both, MovementAxis::Horizontal, MovementAxis::Vertical, MovementAxis::Fixed];
    for _ in 0..40 {
        if blocks.len() == want {
            break;
        }
        let shape = *shapes.choose(r).unwrap();
        let (h, w) = shape.dims();
        if h > rows || w > cols {
            continue;
        }
        let anchor = GridPos::new(r.gen_range(0..=rows - h), r.gen_range(0..=cols - w));
        let foot: Vec<(u8, u8)> = (0..h).flat_map(|dr| (0..w).map(move |dc| (anchor.row + dr, anchor.col + dc))).collect();
        if foot.iter().any(|c| taken.contains(c)) {
            continue;
        }
        taken.extend(foot);
        // The target block always moves on both axes so most levels are solvable.
        let axis = if blocks.is_empty() { MovementAxis::Both } else { *axes.choose(r).unwrap() };
        blocks.push(Block { id: format!("b{}", blocks.len()), shape, anchor, movement_axis: axis });
    }
    SlidingPathLevel {
        stage_id: 1,
        rows,
        cols,
        blocks,
        target_block_id: "b0".into(),
        endpoint: GridPos::new(r.gen_range(0..rows), r.gen_range(0..cols)),
        move_limit: GENEROUS,
        time_limit_s: 600,
        tutorial: String::new(),
    }
}

pub fn random_graph(r: &mut Rng) -> GraphLevel {
    let (rows, cols) = (r.gen_range(2..=4u8), r.gen_range(2..=4u8));
    let mut all = cells(rows, cols);
    all.shuffle(r);
    let n = r.gen_range(2..=all.len());
    let nodes: BTreeSet<GridPos> = all[..n].iter().copied().collect();
    let obstacles: BTreeSet<GridPos> = all[n..].iter().copied().filter(|_| r.gen_bool(0.5)).collect();
    GraphLevel {
        stage_id: 1,
        rows,
        cols,
        start: all[0],
        nodes,
        obstacles,
        time_limit_s: 600,
        tutorial: String::new(),
    }
}

fn agree<M>(a: &SolveResult<M>, b: &SolveResult<M>) -> Result<(), String> {
    if a.solvable != b.solvable || a.optimal_moves != b.optimal_moves {
        return Err(format!("bfs {:?} vs iddfs {:?}", a.optimal_moves, b.optimal_moves));
    }
    Ok(())
}

/// Both searches agree and the witness wins the real game in exactly the
/// optimal number of moves.
pub fn check_groupswap(level: &GroupSwapLevel) -> Result<Option<u32>, String> {
    let bfs = solve_groupswap(level, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    let iddfs = solve_groupswap_iddfs(level, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    agree(&bfs, &iddfs)?;
    for witness in [&bfs.witness, &iddfs.witness] {
        let mut game = GroupSwapState::new(GroupSwapLevel { move_limit: GENEROUS, ..level.clone() });
        for &mv in witness.iter() {
            if !matches!(game.apply(mv).map_err(|e| e.to_string())?, MoveOutcome::Accepted(_)) {
                return Err(format!("witness move {mv:?} rejected"));
            }
        }
        check_replay(bfs.solvable, game.status(), game.moves_used(), bfs.optimal_moves)?;
    }
    Ok(bfs.optimal_moves)
}

pub fn check_sliding(level: &SlidingPathLevel) -> Result<Option<u32>, String> {
    let bfs = solve_sliding(level, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    let iddfs = solve_sliding_iddfs(level, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    agree(&bfs, &iddfs)?;
    for witness in [&bfs.witness, &iddfs.witness] {
        let mut game = SlidingState::new(SlidingPathLevel { move_limit: GENEROUS, ..level.clone() });
        if game.is_solved() {
            // Already solved at the start: the optimum is zero moves.
            check_replay(bfs.solvable, StageStatus::Won, 0, bfs.optimal_moves)?;
            continue;
        }
        for &mv in witness.iter() {
            if !matches!(game.apply(mv).map_err(|e| e.to_string())?, MoveOutcome::Accepted(_)) {
                return Err(format!("witness move {mv:?} rejected"));
            }
        }
        check_replay(bfs.solvable, game.status(), game.moves_used(), bfs.optimal_moves)?;
    }
    Ok(bfs.optimal_moves)
}

pub fn check_graph(level: &GraphLevel) -> Result<Option<u32>, String> {
    let bfs = solve_graph_bfs(level, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    let iddfs = solve_graph(level, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    agree(&bfs, &iddfs)?;
    for witness in [&bfs.witness, &iddfs.witness] {
        let mut game = GraphState::new(level.clone());
        for &d in witness.iter() {
            if game.apply(d).map_err(|e| e.to_string())?.is_err() {
                return Err(format!("witness direction {d:?} rejected"));
            }
        }
        check_replay(bfs.solvable, game.status(), game.attempt.moves_used, bfs.optimal_moves)?;
    }
    Ok(bfs.optimal_moves)
}

fn check_replay(solvable: bool, status: StageStatus, used: u32, optimum: Option<u32>) -> Result<(), String> {
    if !solvable {
        return Ok(());
    }
    if status != StageStatus::Won || Some(used) != optimum {
        return Err(format!("replay ended {status:?} after {used} moves, optimum {optimum:?}"));
    }
    Ok(())
}

pub struct SweepSummary {
    pub checked: usize,
    pub solvable: usize,
    pub failures: Vec<String>,
}

/// Shipped levels plus `per_game` random levels for each puzzle game.
pub fn solver_sweep(per_game: usize, seed: u64) -> SweepSummary {
    let mut s = SweepSummary { checked: 0, solvable: 0, failures: Vec::new() };
    let mut note = |label: String, r: Result<Option<u32>, String>| {
        s.checked += 1;
        match r {
            Ok(Some(_)) => s.solvable += 1,
            Ok(None) => {}
            Err(e) => s.failures.push(format!("{label}: {e}")),
        }
    };
    let pack = LevelPack::default_pack();
    for l in &pack.group_swap {
        note(format!("shipped group_swap/{}", l.stage_id.as_str()), check_groupswap(l));
    }
    for l in &pack.sliding_path {
        note(format!("shipped sliding_path/{}", l.stage_id), check_sliding(l));
    }
    for l in &pack.graph {
        note(format!("shipped graph/{}", l.stage_id), check_graph(l));
    }
    let mut r = rng::seeded(seed);
    for i in 0..per_game {
        let l = random_groupswap(&mut r);
        note(format!("random group_swap #{i} {l:?}"), check_groupswap(&l));
        let l = random_sliding(&mut r);
        note(format!("random sliding_path #{i} {l:?}"), check_sliding(&l));
        let l = random_graph(&mut r);
        note(format!("random graph #{i} {l:?}"), check_graph(&l));
    }
    s
}
