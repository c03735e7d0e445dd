//! Trait-parameterised synthetic players.
//!
//! An agent plays the whole level pack through the game engines and the
//! session controls, so its log is indistinguishable in form from a human
//! one. How traits shape play is fixed by [`BehaviorModel`]:
//!
//! * `thinking` raises puzzle accuracy (the chance of a solver-optimal move;
//!   errors are uniform legal moves), card memorisation and side-challenge
//!   success, and slightly lowers shooter reflexes.
//! * `information_seeking` and `help_seeking` raise tutorial viewing;
//!   `information_seeking` also raises menu navigation.
//! * `time_management` shortens think time, lowers the pause rate and
//!   improves shooter reflexes.
//! * `persistence` is the chance of playing on at each give-up prompt (time
//!   expiry, failure after expiry, shooter failure after the third death)
//!   and raises side-challenge engagement.
//! * `adaptability` shrinks the puzzle error rate after each restart and
//!   makes skipping preferred over surrendering.
//!
//! Failures before a give-up prompt are always retried. Every stage draws
//! its gameplay from its own seeded streams, which do not depend on
//! `persistence`; this is what makes the surrender count non-increasing in
//! `persistence`.

pub mod cohort;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::graph::GraphState;
use crate::game::groupswap::{GroupSwapState, MoveOutcome};
use crate::game::memory::{MemoryLevel, MemoryState};
use crate::game::session::{ControlAction, ControlError, ControlKind, Session, StageControl};
use crate::game::shooter::{EntityKind, ShooterInput, ShooterLevel, ShooterState, TICK_MS};
use crate::game::sliding::SlidingState;
use crate::game::{Attempt, GameError, StageStatus};
use crate::levels::LevelPack;
use crate::rng::{self, Rng};
use crate::solvers::distance::{distance_map, DistanceMap};
use crate::solvers::graph::GraphPuzzle;
use crate::solvers::groupswap::GroupSwapPuzzle;
use crate::solvers::sliding::SlidingPuzzle;
use crate::solvers::validate::{validate_level_pack, ValidationFailure};
use crate::solvers::{Puzzle, SolveError, DEFAULT_STATE_CAP};
use crate::telemetry::canonical::tracking_code;
use crate::telemetry::event::{Emitted, EventType, GameId};
use crate::telemetry::session::{Consent, Difficulty, SessionLog};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Validation(#[from] ValidationFailure),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("engine rejected agent action: {0}")]
    Engine(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl From<GameError> for AgentError {
    fn from(e: GameError) -> Self {
        AgentError::Engine(e.to_string())
    }
}

impl From<ControlError> for AgentError {
    fn from(e: ControlError) -> Self {
        AgentError::Engine(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraitProfile {
    pub thinking: f64,
    pub information_seeking: f64,
    pub help_seeking: f64,
    pub time_management: f64,
    pub persistence: f64,
    pub adaptability: f64,
}

impl TraitProfile {
    pub const NAMES: [&'static str; 6] =
        ["thinking", "information_seeking", "help_seeking", "time_management", "persistence", "adaptability"];

    pub fn uniform(v: f64) -> Self {
        TraitProfile::from_array([v; 6])
    }

    pub fn to_array(self) -> [f64; 6] {
        [
            self.thinking,
            self.information_seeking,
            self.help_seeking,
            self.time_management,
            self.persistence,
            self.adaptability,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        TraitProfile {
            thinking: a[0],
            information_seeking: a[1],
            help_seeking: a[2],
            time_management: a[3],
            persistence: a[4],
            adaptability: a[5],
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        for (name, v) in Self::NAMES.iter().zip(self.to_array()) {
            if !(0.0..=1.0).contains(&v) {
                return Err(AgentError::Input(format!("trait {name} = {v} is outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// Every coefficient of the profile-to-behaviour mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorModel {
    pub move_base_ms: f64,
    pub move_deliberation_ms: f64,
    pub move_hurry_ms: f64,
    /// Error-rate multiplier per restart is `1 - relearn * adaptability`.
    pub relearn: f64,
    /// Give-up prompts answered before the agent gives up regardless.
    pub max_prompts: u32,

    pub memory_exposure_recall_base: f64,
    pub memory_exposure_recall_thinking: f64,
    pub memory_guess_ms: f64,

    pub shooter_action_rate: f64,
    pub shooter_reflex_base: f64,
    pub shooter_reflex_time_management: f64,
    pub shooter_reflex_thinking: f64,

    /// Per-action pause probability at `time_management = 0`.
    pub pause_rate: f64,
    pub pause_rate_shooter_tick: f64,
    pub pause_cap_per_stage: u32,
    pub pause_min_ms: u64,
    pub pause_max_ms: u64,

    pub nav_base: f64,
    pub nav_information_seeking: f64,
    pub nav_ms: u64,

    pub side_attempt_base: f64,
    pub side_attempt_traits: f64,
    pub side_solve_base: f64,
    pub side_solve_thinking: f64,
    pub side_ms: u64,

    pub tutorial_view_base: f64,
    pub tutorial_view_traits: f64,
    pub tutorial_view_ms: u64,
    pub tutorial_skip_ms: u64,

    pub skip_preference_base: f64,
    pub skip_preference_adaptability: f64,
}

impl Default for BehaviorModel {
    fn default() -> Self {
        BehaviorModel {
            move_base_ms: 1500.0,
            move_deliberation_ms: 1500.0,
            move_hurry_ms: 3000.0,
            relearn: 0.5,
            max_prompts: 6,
            memory_exposure_recall_base: 0.25,
            memory_exposure_recall_thinking: 0.7,
            memory_guess_ms: 2000.0,
            shooter_action_rate: 0.3,
            shooter_reflex_base: 0.55,
            shooter_reflex_time_management: 0.35,
            shooter_reflex_thinking: 0.2,
            pause_rate: 0.06,
            pause_rate_shooter_tick: 0.004,
            pause_cap_per_stage: 3,
            pause_min_ms: 5_000,
            pause_max_ms: 60_000,
            nav_base: 0.1,
            nav_information_seeking: 0.7,
            nav_ms: 1500,
            side_attempt_base: 0.05,
            side_attempt_traits: 0.7,
            side_solve_base: 0.2,
            side_solve_thinking: 0.75,
            side_ms: 20_000,
            tutorial_view_base: 0.15,
            tutorial_view_traits: 0.75,
            tutorial_view_ms: 15_000,
            tutorial_skip_ms: 1_000,
            skip_preference_base: 0.35,
            skip_preference_adaptability: 0.3,
        }
    }
}

/// A validated level pack with precomputed moves-to-goal tables.
pub struct PreparedPack {
    pub pack: LevelPack,
    group_swap: Vec<DistanceMap<(u64, u64)>>,
    sliding: Vec<DistanceMap<Vec<crate::game::GridPos>>>,
    graph: Vec<DistanceMap<(u64, crate::game::GridPos)>>,
}

impl PreparedPack {
    pub fn new(pack: LevelPack) -> Result<Self, AgentError> {
        validate_level_pack(&pack, DEFAULT_STATE_CAP).check()?;
        let group_swap = pack
            .group_swap
            .iter()
            .map(|l| distance_map(&GroupSwapPuzzle::new(l)?, DEFAULT_STATE_CAP))
            .collect::<Result<_, _>>()?;
        let sliding = pack
            .sliding_path
            .iter()
            .map(|l| distance_map(&SlidingPuzzle::new(l)?, DEFAULT_STATE_CAP))
            .collect::<Result<_, _>>()?;
        let graph = pack
            .graph
            .iter()
            .map(|l| distance_map(&GraphPuzzle::new(l)?, DEFAULT_STATE_CAP))
            .collect::<Result<_, _>>()?;
        Ok(PreparedPack { pack, group_swap, sliding, graph })
    }
}

/// Engine states the puzzle driver can steer.
trait PuzzleStage: StageControl {
    fn attempt_mut(&mut self) -> &mut Attempt;
}

impl PuzzleStage for GroupSwapState {
    fn attempt_mut(&mut self) -> &mut Attempt {
        &mut self.attempt
    }
}

impl PuzzleStage for SlidingState {
    fn attempt_mut(&mut self) -> &mut Attempt {
        &mut self.attempt
    }
}

impl PuzzleStage for GraphState {
    fn attempt_mut(&mut self) -> &mut Attempt {
        &mut self.attempt
    }
}

const STAGE_STREAMS: u64 = 1 << 16;

struct Sim<'a> {
    p: TraitProfile,
    m: &'a BehaviorModel,
    seed: u64,
    session: Session,
    now: u64,
    stage_ord: u64,
    /// Stream for the current stage's give-up decisions.
    decide: Rng,
    /// Stream for the current stage's pauses.
    pauses: Rng,
    pauses_in_stage: u32,
    prompts_in_stage: u32,
    /// Drawn once per stage so the skip/surrender choice does not depend on
    /// how many prompts preceded it.
    prefers_skip: bool,
    challenge_cursor: usize,
}

impl<'a> Sim<'a> {
    fn stream(&self, label: &str, index: u64) -> Rng {
        rng::seeded(rng::derive(rng::derive_named(self.seed, label), index))
    }

    fn emit(&mut self, game: GameId, stage: u8, events: impl IntoIterator<Item = Emitted>) {
        self.session.record(self.now, game, stage, events);
    }

    fn control(
        &mut self,
        action: ControlAction,
        stage: Option<&mut dyn StageControl>,
    ) -> Result<(), AgentError> {
        self.session.apply_control(&action, stage)?;
        Ok(())
    }

    fn simple(&mut self, kind: ControlKind, game: GameId, stage: u8) -> Result<(), AgentError> {
        let a = ControlAction::new(kind, game, stage, self.now);
        self.control(a, None)
    }

    fn menu(&mut self, screen: &str) -> Result<(), AgentError> {
        self.now += self.m.nav_ms;
        let a = ControlAction::new(ControlKind::MenuNav, GameId::Meta, 0, self.now).with("screen", screen);
        self.control(a, None)
    }

    fn maybe_menu(&mut self, rng: &mut Rng, screen: &str) -> Result<(), AgentError> {
        let p = self.m.nav_base + self.m.nav_information_seeking * self.p.information_seeking;
        if rng.gen::<f64>() < p {
            self.menu(screen)?;
        }
        Ok(())
    }

    fn begin_stage(&mut self) {
        self.decide = self.stream("decide", self.stage_ord);
        self.pauses = self.stream("pause", self.stage_ord);
        self.pauses_in_stage = 0;
        self.prompts_in_stage = 0;
        let prefer = self.m.skip_preference_base + self.m.skip_preference_adaptability * self.p.adaptability;
        self.prefers_skip = self.decide.gen::<f64>() < prefer;
    }

    fn maybe_pause(&mut self, game: GameId, stage: u8, rate: f64) -> Result<(), AgentError> {
        let u: f64 = self.pauses.gen();
        if self.pauses_in_stage >= self.m.pause_cap_per_stage || u >= rate * (1.0 - self.p.time_management) {
            return Ok(());
        }
        self.pauses_in_stage += 1;
        self.simple(ControlKind::Pause, game, stage)?;
        self.now += self.pauses.gen_range(self.m.pause_min_ms..=self.m.pause_max_ms);
        self.simple(ControlKind::Resume, game, stage)
    }

    /// Answers a give-up prompt: `true` means play on.
    fn plays_on(&mut self) -> bool {
        self.prompts_in_stage += 1;
        let u: f64 = self.decide.gen();
        self.prompts_in_stage <= self.m.max_prompts && u < self.p.persistence
    }

    /// Skips when allowed, affordable and preferred, otherwise surrenders.
    fn give_up(&mut self, game: GameId, stage: u8, state: &mut dyn StageControl) -> Result<(), AgentError> {
        self.now += 1000;
        let kind = if game.allows_skip() && self.session.wallet.tokens > 0 && self.prefers_skip {
            ControlKind::Skip
        } else {
            ControlKind::Surrender
        };
        self.control(ControlAction::new(kind, game, stage, self.now), Some(state))
    }

    fn side_challenge(&mut self, rng: &mut Rng, pack: &LevelPack) -> Result<(), AgentError> {
        // Both draws always happen so engagement changes never shift the stream.
        let u: f64 = rng.gen();
        let v: f64 = rng.gen();
        let p_attempt = self.m.side_attempt_base
            + self.m.side_attempt_traits * 0.5 * (self.p.thinking + self.p.persistence);
        if pack.side_challenges.is_empty() || u >= p_attempt {
            return Ok(());
        }
        let item = &pack.side_challenges[self.challenge_cursor % pack.side_challenges.len()];
        self.challenge_cursor += 1;
        self.menu("quiz")?;
        self.now += self.m.side_ms;
        let id = item.id.clone();
        let a = ControlAction::new(ControlKind::SideChallengeAttempt, GameId::Meta, 0, self.now).with("challenge", id.as_str());
        self.control(a, None)?;
        let p_solve = self.m.side_solve_base + self.m.side_solve_thinking * self.p.thinking;
        if v < p_solve {
            self.now += 2000;
            let a = ControlAction::new(ControlKind::SideChallengeSolved, GameId::Meta, 0, self.now).with("challenge", id.as_str());
            self.control(a, None)?;
        }
        Ok(())
    }

    fn tutorial(&mut self, rng: &mut Rng, game: GameId, stage: u8, text: &str) -> Result<(), AgentError> {
        let u: f64 = rng.gen();
        if text.is_empty() {
            return Ok(());
        }
        let p_view = self.m.tutorial_view_base
            + self.m.tutorial_view_traits * 0.5 * (self.p.information_seeking + self.p.help_seeking);
        if u < p_view {
            self.simple(ControlKind::TutorialView, game, stage)?;
            self.now += self.m.tutorial_view_ms;
        } else {
            self.simple(ControlKind::TutorialSkip, game, stage)?;
            self.now += self.m.tutorial_skip_ms;
        }
        Ok(())
    }

    fn move_ms(&self, rng: &mut Rng) -> u64 {
        let jitter: f64 = rng.gen_range(0.5..1.5);
        let ms = self.m.move_base_ms
            + self.m.move_deliberation_ms * self.p.thinking
            + self.m.move_hurry_ms * (1.0 - self.p.time_management) * jitter;
        ms.round() as u64
    }

    /// Plays one puzzle stage to a terminal status.
    #[allow(clippy::too_many_arguments)]
    fn play_puzzle<P: Puzzle, S: PuzzleStage>(
        &mut self,
        game: GameId,
        stage: u8,
        puzzle: &P,
        dist: &DistanceMap<P::Key>,
        state: &mut S,
        search_state: impl Fn(&S) -> P::State,
        apply: impl Fn(&mut S, P::Move) -> Result<Vec<Emitted>, AgentError>,
    ) -> Result<(), AgentError> {
        let mut restarts = 0u64;
        let mut play = self.stream("play", self.stage_ord * STAGE_STREAMS);
        loop {
            match state.stage_status() {
                StageStatus::Won | StageStatus::Skipped | StageStatus::Surrendered => return Ok(()),
                StageStatus::Playing => {
                    self.maybe_pause(game, stage, self.m.pause_rate)?;
                    let dt = self.move_ms(&mut play);
                    self.now += dt;
                    if let Some(ev) = state.attempt_mut().advance(dt) {
                        self.emit(game, stage, [ev]);
                        continue;
                    }
                    let s = search_state(state);
                    let succ = puzzle.successors(&s);
                    let error_rate = (1.0 - self.p.thinking)
                        * (1.0 - self.m.relearn * self.p.adaptability).powi(restarts as i32);
                    let u: f64 = play.gen();
                    let pick = if u < error_rate {
                        succ.choose(&mut play).map(|(mv, _)| mv.clone())
                    } else {
                        let best = succ
                            .iter()
                            .filter_map(|(_, n)| dist.get(&puzzle.key(n)))
                            .min();
                        let optimal: Vec<_> = succ
                            .iter()
                            .filter(|(_, n)| best.is_some() && dist.get(&puzzle.key(n)) == best)
                            .collect();
                        optimal.choose(&mut play).map(|(mv, _)| mv.clone())
                    };
                    let Some(mv) = pick.or_else(|| succ.first().map(|(mv, _)| mv.clone())) else {
                        return Err(AgentError::Engine(format!("{game} stage {stage}: no legal move while playing")));
                    };
                    let events = apply(state, mv)?;
                    self.emit(game, stage, events);
                }
                StageStatus::TimeExpired => {
                    if self.plays_on() {
                        self.now += 500;
                        self.control(ControlAction::new(ControlKind::Continue, game, stage, self.now), Some(state))?;
                    } else {
                        self.give_up(game, stage, state)?;
                    }
                }
                StageStatus::OutOfMoves | StageStatus::Stuck | StageStatus::Dead => {
                    if state.surrender_offered() && !self.plays_on() {
                        self.give_up(game, stage, state)?;
                    } else {
                        self.now += 1000;
                        self.control(ControlAction::new(ControlKind::Restart, game, stage, self.now), Some(state))?;
                        restarts += 1;
                        play = self.stream("play", self.stage_ord * STAGE_STREAMS + restarts);
                    }
                }
            }
        }
    }

    fn play_memory(&mut self, level: &MemoryLevel, stage: u8) -> Result<(), AgentError> {
        let game = GameId::Memory;
        let mut play = self.stream("play", self.stage_ord * STAGE_STREAMS);
        let mut state = MemoryState::begin(level.clone(), rng::derive(self.seed, self.stage_ord));
        let recall = self.m.memory_exposure_recall_base + self.m.memory_exposure_recall_thinking * self.p.thinking;
        let n = state.layout.len();
        let mut known: Vec<bool> = (0..n).map(|_| play.gen::<f64>() < recall).collect();
        self.now += level.exposure_ms;
        state.reveal_elapsed();
        while state.status == StageStatus::Playing {
            self.maybe_pause(game, stage, self.m.pause_rate)?;
            self.now += (self.m.memory_guess_ms * play.gen_range(0.6..1.4)).round() as u64;
            let open: Vec<usize> = (0..n).filter(|&s| !state.is_matched(s)).collect();
            let pair = open.iter().find_map(|&a| {
                open.iter().find(|&&b| b != a && known[a] && known[b] && state.layout[a] == state.layout[b]).map(|&b| (a, b))
            });
            let (a, b) = match pair {
                Some(p) => p,
                None => {
                    let unknown: Vec<usize> = open.iter().copied().filter(|&s| !known[s]).collect();
                    let a = *unknown.choose(&mut play).unwrap_or(&open[0]);
                    let partner = open.iter().copied().find(|&s| s != a && known[s] && state.layout[s] == state.layout[a]);
                    let b = match partner {
                        Some(b) => b,
                        None => {
                            let rest: Vec<usize> = open.iter().copied().filter(|&s| s != a && !known[s]).collect();
                            let pool = if rest.is_empty() { open.iter().copied().filter(|&s| s != a).collect() } else { rest };
                            *pool.choose(&mut play).expect("two open cards remain")
                        }
                    };
                    (a, b)
                }
            };
            let (_, events) = state.guess(a, b)?;
            for s in [a, b] {
                if play.gen::<f64>() < recall {
                    known[s] = true;
                }
            }
            self.emit(game, stage, events);
        }
        Ok(())
    }

    fn shooter_input(&self, state: &ShooterState, rng: &mut Rng) -> ShooterInput {
        if rng.gen::<f64>() >= self.m.shooter_action_rate {
            return ShooterInput::None;
        }
        let reflex = (self.m.shooter_reflex_base
            + self.m.shooter_reflex_time_management * self.p.time_management
            - self.m.shooter_reflex_thinking * self.p.thinking)
            .clamp(0.0, 1.0);
        if rng.gen::<f64>() >= reflex {
            return *[ShooterInput::None, ShooterInput::Left, ShooterInput::Right, ShooterInput::Fire]
                .choose(rng)
                .expect("non-empty");
        }
        let lanes = state.level.lanes;
        let prow = state.player_row();
        let col = state.player_col;
        let danger = |lane: u8| {
            state.entities.iter().any(|e| e.lane == lane && e.kind.is_hazard() && e.row + 3 >= prow)
        };
        let left = if col == 0 { lanes - 1 } else { col - 1 };
        let right = if col + 1 == lanes { 0 } else { col + 1 };
        if danger(col) {
            return match (danger(left), danger(right)) {
                (false, _) => ShooterInput::Left,
                (true, false) => ShooterInput::Right,
                (true, true) => ShooterInput::Fire,
            };
        }
        if state.cooldown == 0 && state.entities.iter().any(|e| e.lane == col && e.kind.is_hazard()) {
            return ShooterInput::Fire;
        }
        let toward = |lane: u8| if lane < col { ShooterInput::Left } else { ShooterInput::Right };
        let safe_step = |lane: u8| !danger(if lane < col { left } else { right });
        let nearest = |pred: &dyn Fn(EntityKind) -> bool| {
            state
                .entities
                .iter()
                .filter(|e| pred(e.kind) && e.lane != col && safe_step(e.lane))
                .min_by_key(|e| (e.lane.abs_diff(col), e.lane))
                .map(|e| e.lane)
        };
        if let Some(l) = nearest(&|k| matches!(k, EntityKind::Gold | EntityKind::PowerUp)) {
            return toward(l);
        }
        if let Some(l) = nearest(&|k| k.is_hazard()) {
            return toward(l);
        }
        ShooterInput::None
    }

    fn play_shooter(&mut self, level: &ShooterLevel, stage: u8) -> Result<(), AgentError> {
        let game = GameId::Shooter;
        let mut state = ShooterState::new(level.clone());
        let mut attempt = 0u64;
        let mut spawn = self.stream("spawn", self.stage_ord * STAGE_STREAMS);
        let mut input = self.stream("play", self.stage_ord * STAGE_STREAMS);
        loop {
            match state.status {
                StageStatus::Won | StageStatus::Surrendered => return Ok(()),
                StageStatus::Playing => {
                    self.maybe_pause(game, stage, self.m.pause_rate_shooter_tick)?;
                    let i = self.shooter_input(&state, &mut input);
                    let events = state.tick(i, &mut spawn)?;
                    self.now += TICK_MS;
                    self.emit(game, stage, events);
                }
                _ => {
                    if state.surrender_offered() && !self.plays_on() {
                        self.now += 1000;
                        self.control(ControlAction::new(ControlKind::Surrender, game, stage, self.now), Some(&mut state))?;
                    } else {
                        self.now += 1000;
                        self.control(ControlAction::new(ControlKind::Restart, game, stage, self.now), Some(&mut state))?;
                        attempt += 1;
                        spawn = self.stream("spawn", self.stage_ord * STAGE_STREAMS + attempt);
                        input = self.stream("play", self.stage_ord * STAGE_STREAMS + attempt);
                    }
                }
            }
        }
    }
}

/// Plays the whole pack once and returns the finalized (consent = send)
/// session log.
pub fn simulate_participant(
    profile: &TraitProfile,
    prepared: &PreparedPack,
    model: &BehaviorModel,
    seed: u64,
    session_id: &str,
) -> Result<SessionLog, AgentError> {
    profile.validate()?;
    let pack = &prepared.pack;
    let mut sim = Sim {
        p: *profile,
        m: model,
        seed,
        session: Session::new(session_id),
        now: 0,
        stage_ord: 0,
        decide: rng::seeded(0),
        pauses: rng::seeded(0),
        pauses_in_stage: 0,
        prompts_in_stage: 0,
        prefers_skip: false,
        challenge_cursor: 0,
    };
    let mut meta = sim.stream("meta", 0);
    let difficulty = {
        let u: f64 = meta.gen();
        if u < 0.1 + 0.5 * profile.thinking {
            Difficulty::Hard
        } else if u < 0.85 {
            Difficulty::Normal
        } else {
            Difficulty::Easy
        }
    };
    sim.menu("main")?;
    for screen in ["settings", "levels"] {
        sim.maybe_menu(&mut meta, screen)?;
    }

    for game in GameId::PLAYABLE {
        let stages = match game {
            GameId::GroupSwap => pack.group_swap.len(),
            GameId::SlidingPath => pack.sliding_path.len(),
            GameId::Memory => pack.memory.len(),
            GameId::Shooter => pack.shooter.len(),
            GameId::Graph => pack.graph.len(),
            GameId::Meta => 0,
        };
        for idx in 0..stages {
            sim.stage_ord += 1;
            let mut menu_rng = sim.stream("menu", sim.stage_ord);
            sim.maybe_menu(&mut menu_rng, "levels")?;
            if game.is_puzzle() {
                sim.side_challenge(&mut menu_rng, pack)?;
            }
            sim.begin_stage();
            match game {
                GameId::GroupSwap => {
                    let level = &pack.group_swap[idx];
                    let stage = level.stage_id.number();
                    sim.tutorial(&mut menu_rng, game, stage, &level.tutorial)?;
                    sim.emit(game, stage, [Emitted::new(EventType::StageStart)]);
                    let puzzle = GroupSwapPuzzle::new(level)?;
                    let mut state = GroupSwapState::new(level.clone());
                    sim.play_puzzle(
                        game,
                        stage,
                        &puzzle,
                        &prepared.group_swap[idx],
                        &mut state,
                        |s| s.piece_positions.clone(),
                        |s, mv| match s.apply(mv)? {
                            MoveOutcome::Accepted(ev) => Ok(ev),
                            MoveOutcome::Rejected(r) => Err(AgentError::Engine(format!("{r:?}"))),
                        },
                    )?;
                }
                GameId::SlidingPath => {
                    let level = &pack.sliding_path[idx];
                    let stage = level.stage_id;
                    sim.tutorial(&mut menu_rng, game, stage, &level.tutorial)?;
                    sim.emit(game, stage, [Emitted::new(EventType::StageStart)]);
                    let puzzle = SlidingPuzzle::new(level)?;
                    let mut state = SlidingState::new(level.clone());
                    sim.play_puzzle(
                        game,
                        stage,
                        &puzzle,
                        &prepared.sliding[idx],
                        &mut state,
                        |s| s.anchors.clone(),
                        |s, mv| match s.apply(mv)? {
                            MoveOutcome::Accepted(ev) => Ok(ev),
                            MoveOutcome::Rejected(r) => Err(AgentError::Engine(format!("{r:?}"))),
                        },
                    )?;
                }
                GameId::Graph => {
                    let level = &pack.graph[idx];
                    let stage = level.stage_id;
                    sim.tutorial(&mut menu_rng, game, stage, &level.tutorial)?;
                    sim.emit(game, stage, [Emitted::new(EventType::StageStart)]);
                    let puzzle = GraphPuzzle::new(level)?;
                    let mut state = GraphState::new(level.clone());
                    sim.play_puzzle(
                        game,
                        stage,
                        &puzzle,
                        &prepared.graph[idx],
                        &mut state,
                        |s| puzzle.state_of(&s.visited),
                        |s, dir| s.apply(dir)?.map_err(|r| AgentError::Engine(format!("{r:?}"))),
                    )?;
                }
                GameId::Memory => {
                    let level = &pack.memory[idx];
                    sim.tutorial(&mut menu_rng, game, level.stage_id, &level.tutorial)?;
                    sim.emit(game, level.stage_id, [Emitted::new(EventType::StageStart)]);
                    sim.play_memory(level, level.stage_id)?;
                }
                GameId::Shooter => {
                    let level = &pack.shooter[idx];
                    sim.tutorial(&mut menu_rng, game, level.stage_id, &level.tutorial)?;
                    sim.emit(game, level.stage_id, [Emitted::new(EventType::StageStart)]);
                    sim.play_shooter(level, level.stage_id)?;
                }
                GameId::Meta => {}
            }
        }
    }

    sim.now += 3000;
    sim.emit(GameId::Meta, 0, [Emitted::new(EventType::ConsentChoice).with("consent", "send")]);
    let events = sim.session.recorder.into_events();
    let code = tracking_code(&events);
    Ok(SessionLog {
        session_id: session_id.to_owned(),
        created_at: 0,
        difficulty,
        consent: Some(Consent::Send),
        events,
        finalized: true,
        tracking_code: Some(code),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prepared() -> PreparedPack {
        PreparedPack::new(LevelPack::default_pack()).unwrap()
    }

    fn count(log: &SessionLog, t: EventType) -> usize {
        log.events.iter().filter(|e| e.event_type == t).count()
    }

    #[test]
    fn same_profile_and_seed_replay_identically() {
        let p = prepared();
        let prof = TraitProfile::uniform(0.5);
        let a = simulate_participant(&prof, &p, &BehaviorModel::default(), 7, "a").unwrap();
        let b = simulate_participant(&prof, &p, &BehaviorModel::default(), 7, "a").unwrap();
        assert_eq!(a, b);
        assert!(a.is_well_formed());
    }

    #[test]
    fn perfect_player_wins_every_puzzle_optimally() {
        let p = prepared();
        let log = simulate_participant(&TraitProfile::uniform(1.0), &p, &BehaviorModel::default(), 3, "x").unwrap();
        assert_eq!(count(&log, EventType::Surrender), 0);
        assert_eq!(count(&log, EventType::Skip), 0);
        let optimum = crate::solvers::validate::validate_level_pack(&p.pack, DEFAULT_STATE_CAP);
        for game in [GameId::GroupSwap, GameId::SlidingPath, GameId::Graph] {
            let wins: Vec<_> =
                log.events.iter().filter(|e| e.game_id == game && e.event_type == EventType::Win).collect();
            let expected: Vec<_> = optimum.levels.iter().filter(|l| l.game == game).collect();
            assert_eq!(wins.len(), expected.len(), "{game}");
            for (w, l) in wins.iter().zip(expected) {
                assert_eq!(w.int("moves_used").map(|v| v as u32), l.optimal_moves, "{game}");
            }
        }
    }

    #[test]
    fn hopeless_player_gives_up_at_time_expiry() {
        let p = prepared();
        let log = simulate_participant(&TraitProfile::uniform(0.0), &p, &BehaviorModel::default(), 5, "z").unwrap();
        assert_eq!(count(&log, EventType::Continue), 0);
        let expiries = count(&log, EventType::TimeExpired);
        assert!(expiries > 0);
        // Every expired stage ends right there in a skip or a surrender.
        for (i, e) in log.events.iter().enumerate() {
            if e.event_type == EventType::TimeExpired {
                let next = &log.events[i + 1];
                assert!(matches!(next.event_type, EventType::Skip | EventType::Surrender), "{next:?}");
            }
        }
    }
}
