//! Gameplay event schema.
//!
//! Every interaction a player makes is recorded as a [`GameEvent`]. Events
//! carry no personally identifying data: the session id is an opaque token
//! and payload keys are restricted to gameplay details.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which game (or the surrounding menu) produced an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameId {
    GroupSwap,
    SlidingPath,
    Memory,
    Shooter,
    Graph,
    Meta,
}

impl GameId {
    pub const ALL: [GameId; 6] = [
        GameId::GroupSwap,
        GameId::SlidingPath,
        GameId::Memory,
        GameId::Shooter,
        GameId::Graph,
        GameId::Meta,
    ];

    pub const PLAYABLE: [GameId; 5] = [
        GameId::GroupSwap,
        GameId::SlidingPath,
        GameId::Memory,
        GameId::Shooter,
        GameId::Graph,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GameId::GroupSwap => "group_swap",
            GameId::SlidingPath => "sliding_path",
            GameId::Memory => "memory",
            GameId::Shooter => "shooter",
            GameId::Graph => "graph",
            GameId::Meta => "meta",
        }
    }

    /// Puzzle games use skip tokens and offer surrender after time expiry.
    pub fn is_puzzle(self) -> bool {
        matches!(self, GameId::GroupSwap | GameId::SlidingPath | GameId::Graph)
    }

    pub fn allows_skip(self) -> bool {
        self.is_puzzle()
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GameId::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| format!("unknown game id `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    StageStart,
    MoveAccepted,
    Guess,
    Shot,
    Spawn,
    Collision,
    Collect,
    Destroy,
    Escape,
    ChallengeComplete,
    Win,
    Lose,
    TimeExpired,
    Continue,
    Pause,
    Resume,
    Restart,
    Surrender,
    Skip,
    TutorialView,
    TutorialSkip,
    MenuNav,
    SideChallengeAttempt,
    SideChallengeSolved,
    ConsentChoice,
}

impl EventType {
    pub const ALL: [EventType; 25] = [
        EventType::StageStart,
        EventType::MoveAccepted,
        EventType::Guess,
        EventType::Shot,
        EventType::Spawn,
        EventType::Collision,
        EventType::Collect,
        EventType::Destroy,
        EventType::Escape,
        EventType::ChallengeComplete,
        EventType::Win,
        EventType::Lose,
        EventType::TimeExpired,
        EventType::Continue,
        EventType::Pause,
        EventType::Resume,
        EventType::Restart,
        EventType::Surrender,
        EventType::Skip,
        EventType::TutorialView,
        EventType::TutorialSkip,
        EventType::MenuNav,
        EventType::SideChallengeAttempt,
        EventType::SideChallengeSolved,
        EventType::ConsentChoice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventType::StageStart => "stage_start",
            EventType::MoveAccepted => "move_accepted",
            EventType::Guess => "guess",
            EventType::Shot => "shot",
            EventType::Spawn => "spawn",
            EventType::Collision => "collision",
            EventType::Collect => "collect",
            EventType::Destroy => "destroy",
            EventType::Escape => "escape",
            EventType::ChallengeComplete => "challenge_complete",
            EventType::Win => "win",
            EventType::Lose => "lose",
            EventType::TimeExpired => "time_expired",
            EventType::Continue => "continue",
            EventType::Pause => "pause",
            EventType::Resume => "resume",
            EventType::Restart => "restart",
            EventType::Surrender => "surrender",
            EventType::Skip => "skip",
            EventType::TutorialView => "tutorial_view",
            EventType::TutorialSkip => "tutorial_skip",
            EventType::MenuNav => "menu_nav",
            EventType::SideChallengeAttempt => "side_challenge_attempt",
            EventType::SideChallengeSolved => "side_challenge_solved",
            EventType::ConsentChoice => "consent_choice",
        }
    }

    /// Whether `self` may be emitted by `game`.
    pub fn valid_for(self, game: GameId) -> bool {
        use EventType::*;
        match self {
            Guess => game == GameId::Memory,
            Shot | Spawn | Collision | Collect | Destroy | Escape | ChallengeComplete => {
                game == GameId::Shooter
            }
            MoveAccepted => matches!(
                game,
                GameId::GroupSwap | GameId::SlidingPath | GameId::Graph | GameId::Shooter
            ),
            TimeExpired | Continue | Skip => game.is_puzzle(),
            StageStart | Win | Lose | Pause | Resume | Restart | Surrender | TutorialView
            | TutorialSkip => game != GameId::Meta,
            MenuNav | SideChallengeAttempt | SideChallengeSolved | ConsentChoice => {
                game == GameId::Meta
            }
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A type-tagged payload value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(i64::from(v))
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// Sorted key/value details attached to an event.
pub type Payload = BTreeMap<String, Value>;

/// Builds a payload from `(key, value)` pairs.
pub fn payload<const N: usize>(pairs: [(&str, Value); N]) -> Payload {
    pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

/// An event as produced by a game engine before it is stamped with a
/// sequence number, clock and stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub event_type: EventType,
    pub payload: Payload,
}

impl Emitted {
    pub fn new(event_type: EventType) -> Self {
        Emitted { event_type, payload: Payload::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.payload.insert(key.to_owned(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    pub session_id: String,
    pub seq: u64,
    pub timestamp_ms: u64,
    pub game_id: GameId,
    pub stage_id: u8,
    pub event_type: EventType,
    #[serde(default)]
    pub payload: Payload,
}

impl GameEvent {
    pub fn int(&self, key: &str) -> Option<i64> {
        self.payload.get(key).and_then(Value::as_i64)
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.payload.get(key).and_then(Value::as_str)
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        self.payload.get(key).and_then(Value::as_bool)
    }
}

/// Stamps engine output into [`GameEvent`]s with a gapless sequence.
///
/// Timestamps are clamped so that they never run backwards.
#[derive(Debug, Clone)]
pub struct Recorder {
    session_id: String,
    next_seq: u64,
    last_ts: u64,
    events: Vec<GameEvent>,
}

impl Recorder {
    pub fn new(session_id: impl Into<String>) -> Self {
        Recorder { session_id: session_id.into(), next_seq: 0, last_ts: 0, events: Vec::new() }
    }

    pub fn record(&mut self, timestamp_ms: u64, game_id: GameId, stage_id: u8, emitted: Emitted) {
        debug_assert!(emitted.event_type.valid_for(game_id), "{} for {}", emitted.event_type, game_id);
        let ts = timestamp_ms.max(self.last_ts);
        self.last_ts = ts;
        self.events.push(GameEvent {
            session_id: self.session_id.clone(),
            seq: self.next_seq,
            timestamp_ms: ts,
            game_id,
            stage_id,
            event_type: emitted.event_type,
            payload: emitted.payload,
        });
        self.next_seq += 1;
    }

    pub fn record_all(
        &mut self,
        timestamp_ms: u64,
        game_id: GameId,
        stage_id: u8,
        emitted: impl IntoIterator<Item = Emitted>,
    ) {
        for e in emitted {
            self.record(timestamp_ms, game_id, stage_id, e);
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[GameEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<GameEvent> {
        self.events
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recorder_is_gapless_and_clamps_time() {
        let mut rec = Recorder::new("s");
        rec.record(100, GameId::Meta, 0, Emitted::new(EventType::MenuNav));
        rec.record(50, GameId::Meta, 0, Emitted::new(EventType::MenuNav));
        let ev = rec.events();
        assert_eq!(ev[0].seq, 0);
        assert_eq!(ev[1].seq, 1);
        assert_eq!(ev[1].timestamp_ms, 100);
    }

    #[test]
    fn validity_table() {
        assert!(!EventType::Guess.valid_for(GameId::Shooter));
        assert!(EventType::Guess.valid_for(GameId::Memory));
        assert!(!EventType::Skip.valid_for(GameId::Memory));
        assert!(EventType::Skip.valid_for(GameId::Graph));
        assert!(!EventType::MenuNav.valid_for(GameId::GroupSwap));
    }

    #[test]
    fn game_id_round_trips_through_str() {
        for g in GameId::ALL {
            assert_eq!(g.as_str().parse::<GameId>().unwrap(), g);
        }
    }
}
