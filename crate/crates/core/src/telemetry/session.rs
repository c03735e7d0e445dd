use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::event::GameEvent;

/// Difficulty chosen by the player at session start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Normal,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Normal, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Normal => "normal",
            Difficulty::Hard => "hard",
        }
    }

    pub fn ordinal(self) -> u8 {
        match self {
            Difficulty::Easy => 0,
            Difficulty::Normal => 1,
            Difficulty::Hard => 2,
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Difficulty::ALL.into_iter().find(|d| d.as_str() == s).ok_or_else(|| format!("unknown difficulty `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consent {
    Send,
    Withhold,
}

impl Consent {
    pub fn as_str(self) -> &'static str {
        match self {
            Consent::Send => "send",
            Consent::Withhold => "withhold",
        }
    }
}

impl FromStr for Consent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "send" => Ok(Consent::Send),
            "withhold" => Ok(Consent::Withhold),
            _ => Err(format!("unknown consent `{s}`")),
        }
    }
}

/// Everything the server keeps about one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub created_at: u64,
    pub difficulty: Difficulty,
    pub consent: Option<Consent>,
    pub events: Vec<GameEvent>,
    pub finalized: bool,
    pub tracking_code: Option<String>,
}

impl SessionLog {
    pub fn new(session_id: impl Into<String>, difficulty: Difficulty, created_at: u64) -> Self {
        SessionLog {
            session_id: session_id.into(),
            created_at,
            difficulty,
            consent: None,
            events: Vec::new(),
            finalized: false,
            tracking_code: None,
        }
    }

    pub fn next_seq(&self) -> u64 {
        self.events.len() as u64
    }

    /// Whether seqs are gapless from 0, timestamps never decrease and every
    /// event belongs to this session and its game.
    pub fn is_well_formed(&self) -> bool {
        self.events.iter().enumerate().all(|(i, e)| {
            e.seq == i as u64 && e.session_id == self.session_id && e.event_type.valid_for(e.game_id)
        }) && self.events.windows(2).all(|w| w[0].timestamp_ms <= w[1].timestamp_ms)
    }
}
