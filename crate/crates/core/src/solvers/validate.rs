//! Level-pack validation: structural checks plus a solver run per puzzle
//! level.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::solve_graph;
use super::groupswap::solve_groupswap;
use super::sliding::solve_sliding;
use super::{SolveError, SolveResult};
use crate::levels::LevelPack;
use crate::telemetry::event::GameId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub game: GameId,
    pub stage: String,
    pub solvable: bool,
    pub optimal_moves: Option<u32>,
    pub move_limit: Option<u32>,
    pub states_expanded: u64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
}

impl LevelReport {
    pub fn label(&self) -> String {
        format!("{}/{}", self.game, self.stage)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub levels: Vec<LevelReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("level {level} failed validation: {problem}")]
pub struct ValidationFailure {
    pub level: String,
    pub problem: String,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.levels.iter().all(|l| l.passed)
    }

    /// The first failing level, if any.
    pub fn check(&self) -> Result<(), ValidationFailure> {
        match self.levels.iter().find(|l| !l.passed) {
            None => Ok(()),
            Some(l) => Err(ValidationFailure { level: l.label(), problem: l.problem.clone().unwrap_or_default() }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<22} {:>8} {:>6} {:>10} {:>6}\n", "level", "optimum", "limit", "expanded", "result");
        for l in &self.levels {
            let opt = l.optimal_moves.map_or("-".to_owned(), |v| v.to_string());
            let lim = l.move_limit.map_or("-".to_owned(), |v| v.to_string());
            let res = if l.passed { "pass" } else { "FAIL" };
            out.push_str(&format!("{:<22} {:>8} {:>6} {:>10} {:>6}", l.label(), opt, lim, l.states_expanded, res));
            if let Some(p) = &l.problem {
                out.push_str(&format!("  {p}"));
            }
            out.push('\n');
        }
        out
    }
}

enum Job<'a> {
    GroupSwap(&'a crate::game::groupswap::GroupSwapLevel),
    Sliding(&'a crate::game::sliding::SlidingPathLevel),
    Graph(&'a crate::game::graph::GraphLevel),
    Memory(&'a crate::game::memory::MemoryLevel),
    Shooter(&'a crate::game::shooter::ShooterLevel),
}

fn puzzle_report<M>(
    game: GameId,
    stage: String,
    move_limit: Option<u32>,
    result: Result<SolveResult<M>, SolveError>,
) -> LevelReport {
    let mut r = LevelReport {
        game,
        stage,
        solvable: false,
        optimal_moves: None,
        move_limit,
        states_expanded: 0,
        passed: false,
        problem: None,
    };
    match result {
        Err(e) => r.problem = Some(e.to_string()),
        Ok(s) => {
            r.solvable = s.solvable;
            r.optimal_moves = s.optimal_moves;
            r.states_expanded = s.states_expanded;
            r.problem = match (s.optimal_moves, move_limit) {
                (None, _) => Some("unsolvable".to_owned()),
                (Some(opt), Some(limit)) if limit < opt => {
                    Some(format!("move_limit {limit} is below the optimum {opt}"))
                }
                _ => None,
            };
            r.passed = r.problem.is_none();
        }
    }
    r
}

fn structural_report(game: GameId, stage: String, check: Result<(), crate::game::GameError>) -> LevelReport {
    let problem = check.err().map(|e| e.to_string());
    LevelReport {
        game,
        stage,
        solvable: problem.is_none(),
        optimal_moves: None,
        move_limit: None,
        states_expanded: 0,
        passed: problem.is_none(),
        problem,
    }
}

/// Validates every level of `pack`, solving puzzles in parallel. Reports come
/// back in pack order. Memory and shooter stages are always completable and
/// only get structural checks.
pub fn validate_level_pack(pack: &LevelPack, cap: usize) -> ValidationReport {
    let mut jobs: Vec<Job> = Vec::new();
    jobs.extend(pack.group_swap.iter().map(Job::GroupSwap));
    jobs.extend(pack.sliding_path.iter().map(Job::Sliding));
    jobs.extend(pack.memory.iter().map(Job::Memory));
    jobs.extend(pack.shooter.iter().map(Job::Shooter));
    jobs.extend(pack.graph.iter().map(Job::Graph));

    let mut levels: Vec<LevelReport> = jobs
        .par_iter()
        .map(|job| match job {
            Job::GroupSwap(l) => puzzle_report(
                GameId::GroupSwap,
                l.stage_id.as_str().to_owned(),
                Some(l.move_limit),
                solve_groupswap(l, cap),
            ),
            Job::Sliding(l) => puzzle_report(
                GameId::SlidingPath,
                l.stage_id.to_string(),
                Some(l.move_limit),
                solve_sliding(l, cap),
            ),
            Job::Graph(l) => puzzle_report(GameId::Graph, l.stage_id.to_string(), None, solve_graph(l, cap)),
            Job::Memory(l) => structural_report(GameId::Memory, l.stage_id.to_string(), l.validate()),
            Job::Shooter(l) => structural_report(GameId::Shooter, l.stage_id.to_string(), l.validate()),
        })
        .collect();

    for w in pack.memory.windows(2) {
        if w[1].pair_count <= w[0].pair_count {
            if let Some(r) = levels
                .iter_mut()
                .find(|r| r.game == GameId::Memory && r.stage == w[1].stage_id.to_string())
            {
                r.passed = false;
                r.problem = Some("pair_count does not increase over the previous stage".to_owned());
            }
        }
    }
    ValidationReport { levels }
}
