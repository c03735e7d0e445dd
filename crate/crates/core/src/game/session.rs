//! Cross-game session controls: pause/resume, restart, surrender, skip
//! tokens, tutorials, menu navigation and side challenges.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::GraphState;
use super::groupswap::GroupSwapState;
use super::memory::MemoryState;
use super::shooter::ShooterState;
use super::sliding::SlidingState;
use super::{Attempt, GameError, StageStatus};
use crate::telemetry::event::{Emitted, EventType, GameEvent, GameId, Payload, Recorder, Value};

pub const INITIAL_SKIPS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipWallet {
    pub tokens: u32,
    pub earned_total: u32,
    pub spent: u32,
}

impl Default for SkipWallet {
    fn default() -> Self {
        SkipWallet { tokens: INITIAL_SKIPS, earned_total: 0, spent: 0 }
    }
}

impl SkipWallet {
    pub fn spend(&mut self) -> Result<(), ControlError> {
        if self.tokens == 0 {
            return Err(ControlError::Wallet);
        }
        self.tokens -= 1;
        self.spent += 1;
        Ok(())
    }

    pub fn earn(&mut self) {
        self.tokens += 1;
        self.earned_total += 1;
    }

    pub fn is_consistent(&self) -> bool {
        self.tokens + self.spent == INITIAL_SKIPS + self.earned_total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Pause,
    Resume,
    Restart,
    Surrender,
    Skip,
    /// Keep playing after the time-limit prompt.
    Continue,
    TutorialView,
    TutorialSkip,
    MenuNav,
    SideChallengeAttempt,
    SideChallengeSolved,
}

impl ControlKind {
    pub fn event_type(self) -> EventType {
        match self {
            ControlKind::Pause => EventType::Pause,
            ControlKind::Resume => EventType::Resume,
            ControlKind::Restart => EventType::Restart,
            ControlKind::Surrender => EventType::Surrender,
            ControlKind::Skip => EventType::Skip,
            ControlKind::Continue => EventType::Continue,
            ControlKind::TutorialView => EventType::TutorialView,
            ControlKind::TutorialSkip => EventType::TutorialSkip,
            ControlKind::MenuNav => EventType::MenuNav,
            ControlKind::SideChallengeAttempt => EventType::SideChallengeAttempt,
            ControlKind::SideChallengeSolved => EventType::SideChallengeSolved,
        }
    }

    fn needs_stage(self) -> bool {
        matches!(self, ControlKind::Restart | ControlKind::Surrender | ControlKind::Skip | ControlKind::Continue)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlAction {
    pub kind: ControlKind,
    pub game_id: GameId,
    pub stage_id: u8,
    pub timestamp_ms: u64,
    /// Extra details copied into the recorded event (e.g. the menu screen).
    #[serde(default)]
    pub payload: Payload,
}

impl ControlAction {
    pub fn new(kind: ControlKind, game_id: GameId, stage_id: u8, timestamp_ms: u64) -> Self {
        ControlAction { kind, game_id, stage_id, timestamp_ms, payload: Payload::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.payload.insert(key.to_owned(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("no skip tokens left")]
    Wallet,
    #[error("rule violation: {0}")]
    Rule(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

fn rule<T>(msg: impl Into<String>) -> Result<T, ControlError> {
    Err(ControlError::Rule(msg.into()))
}

/// The hooks session controls need from a stage in progress.
pub trait StageControl {
    fn game_id(&self) -> GameId;
    fn stage_status(&self) -> StageStatus;
    fn surrender_offered(&self) -> bool;
    fn set_status(&mut self, status: StageStatus);
    fn restart_stage(&mut self) -> Result<(), GameError>;
    fn continue_over_time(&mut self) -> Result<(), GameError> {
        Err(GameError::Rule("this game has no time-limit prompt".into()))
    }
}

macro_rules! puzzle_control {
    ($ty:ty, $game:expr) => {
        impl StageControl for $ty {
            fn game_id(&self) -> GameId {
                $game
            }
            fn stage_status(&self) -> StageStatus {
                self.attempt.status
            }
            fn surrender_offered(&self) -> bool {
                self.attempt.expired
            }
            fn set_status(&mut self, status: StageStatus) {
                self.attempt.status = status;
            }
            fn restart_stage(&mut self) -> Result<(), GameError> {
                self.restart()
            }
            fn continue_over_time(&mut self) -> Result<(), GameError> {
                Attempt::continue_over_time(&mut self.attempt)
            }
        }
    };
}

puzzle_control!(GroupSwapState, GameId::GroupSwap);
puzzle_control!(SlidingState, GameId::SlidingPath);
puzzle_control!(GraphState, GameId::Graph);

impl StageControl for MemoryState {
    fn game_id(&self) -> GameId {
        GameId::Memory
    }
    fn stage_status(&self) -> StageStatus {
        self.status
    }
    fn surrender_offered(&self) -> bool {
        false
    }
    fn set_status(&mut self, status: StageStatus) {
        self.status = status;
    }
    fn restart_stage(&mut self) -> Result<(), GameError> {
        self.restart()
    }
}

impl StageControl for ShooterState {
    fn game_id(&self) -> GameId {
        GameId::Shooter
    }
    fn stage_status(&self) -> StageStatus {
        self.status
    }
    fn surrender_offered(&self) -> bool {
        self.may_surrender()
    }
    fn set_status(&mut self, status: StageStatus) {
        self.status = status;
    }
    fn restart_stage(&mut self) -> Result<(), GameError> {
        self.restart()
    }
}

/// Wall-clock bookkeeping that separates gameplay time from pauses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionClock {
    paused_since: Option<u64>,
    paused_total_ms: u64,
}

impl SessionClock {
    pub fn is_paused(&self) -> bool {
        self.paused_since.is_some()
    }

    /// Gameplay milliseconds elapsed at wall time `now_ms`.
    pub fn gameplay_ms(&self, now_ms: u64) -> u64 {
        let open = self.paused_since.map_or(0, |t| now_ms.saturating_sub(t));
        now_ms.saturating_sub(self.paused_total_ms + open)
    }
}

/// One player's session: controls, wallet and the event log.
#[derive(Debug, Clone)]
pub struct Session {
    pub clock: SessionClock,
    pub wallet: SkipWallet,
    pub recorder: Recorder,
    pending_challenge: bool,
}

impl Session {
    pub fn new(session_id: impl Into<String>) -> Self {
        Session {
            clock: SessionClock::default(),
            wallet: SkipWallet::default(),
            recorder: Recorder::new(session_id),
            pending_challenge: false,
        }
    }

    /// Stamps engine output at wall time `now_ms`.
    pub fn record(&mut self, now_ms: u64, game: GameId, stage: u8, events: impl IntoIterator<Item = Emitted>) {
        self.recorder.record_all(now_ms, game, stage, events);
    }

    /// Applies a control action, recording exactly one event on success.
    pub fn apply_control(
        &mut self,
        action: &ControlAction,
        stage: Option<&mut dyn StageControl>,
    ) -> Result<&GameEvent, ControlError> {
        if self.clock.is_paused() && action.kind != ControlKind::Resume {
            return rule("session is paused");
        }
        let mut emitted = Emitted::new(action.kind.event_type());
        emitted.payload = action.payload.clone();
        if action.kind.needs_stage() {
            let Some(stage) = stage else {
                return rule(format!("{:?} needs an active stage", action.kind));
            };
            if stage.game_id() != action.game_id {
                return rule("action targets a different game than the active stage");
            }
            let status = stage.stage_status();
            if status.is_terminal() {
                return Err(GameError::NotPlaying(status.as_str()).into());
            }
            match action.kind {
                ControlKind::Restart => stage.restart_stage()?,
                ControlKind::Surrender => {
                    if !stage.surrender_offered() {
                        return rule("surrender is not offered yet");
                    }
                    stage.set_status(StageStatus::Surrendered);
                }
                ControlKind::Skip => {
                    if !action.game_id.allows_skip() {
                        return rule(format!("skipping is not available in {}", action.game_id));
                    }
                    self.wallet.spend()?;
                    stage.set_status(StageStatus::Skipped);
                    emitted = emitted.with("tokens_left", self.wallet.tokens);
                }
                ControlKind::Continue => stage.continue_over_time()?,
                _ => unreachable!(),
            }
        } else {
            match action.kind {
                ControlKind::Pause => self.clock.paused_since = Some(action.timestamp_ms),
                ControlKind::Resume => {
                    let Some(since) = self.clock.paused_since.take() else {
                        return rule("resume without a preceding pause");
                    };
                    let span = action.timestamp_ms.saturating_sub(since);
                    self.clock.paused_total_ms += span;
                    emitted = emitted.with("paused_ms", span as i64);
                }
                ControlKind::TutorialView | ControlKind::TutorialSkip => {
                    if action.game_id == GameId::Meta {
                        return rule("tutorials belong to a game");
                    }
                }
                ControlKind::MenuNav | ControlKind::SideChallengeAttempt | ControlKind::SideChallengeSolved => {
                    if action.game_id != GameId::Meta {
                        return rule("menu actions belong to the meta game");
                    }
                    match action.kind {
                        ControlKind::SideChallengeAttempt => self.pending_challenge = true,
                        ControlKind::SideChallengeSolved => {
                            if !std::mem::take(&mut self.pending_challenge) {
                                return rule("no side challenge attempt to solve");
                            }
                            self.wallet.earn();
                            emitted = emitted.with("tokens", self.wallet.tokens);
                        }
                        _ => {}
                    }
                }
                _ => unreachable!(),
            }
        }
        self.recorder.record(action.timestamp_ms, action.game_id, action.stage_id, emitted);
        Ok(self.recorder.events().last().expect("just recorded"))
    }
}
