//! Deterministic rule engines for the five assessment games plus the
//! session controls shared between them.

pub mod graph;
pub mod groupswap;
pub mod memory;
pub mod session;
pub mod shooter;
pub mod sliding;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPos {
    pub row: u8,
    pub col: u8,
}

impl GridPos {
    pub const fn new(row: u8, col: u8) -> Self {
        GridPos { row, col }
    }

    /// One step in `dir`, or `None` when that leaves a `rows`×`cols` grid.
    pub fn step(self, dir: Direction, rows: u8, cols: u8) -> Option<GridPos> {
        let (dr, dc) = dir.delta();
        let r = i16::from(self.row) + i16::from(dr);
        let c = i16::from(self.col) + i16::from(dc);
        if r < 0 || c < 0 || r >= i16::from(rows) || c >= i16::from(cols) {
            None
        } else {
            Some(GridPos::new(r as u8, c as u8))
        }
    }

    pub fn in_bounds(self, rows: u8, cols: u8) -> bool {
        self.row < rows && self.col < cols
    }

    pub fn manhattan(self, other: GridPos) -> u32 {
        u32::from(self.row.abs_diff(other.row)) + u32::from(self.col.abs_diff(other.col))
    }
}

impl fmt::Display for GridPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    /// Lexicographic move order used for deterministic tie-breaking.
    pub const ALL: [Direction; 4] = [Direction::Down, Direction::Left, Direction::Right, Direction::Up];

    pub fn delta(self) -> (i8, i8) {
        match self {
            Direction::Up => (-1, 0),
            Direction::Down => (1, 0),
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::Left | Direction::Right)
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Terminal and non-terminal outcomes of a puzzle stage attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Playing,
    Won,
    /// Time limit reached; the player chooses to continue or surrender.
    TimeExpired,
    /// Move budget used up without solving; the attempt must be restarted.
    OutOfMoves,
    /// Graph game: no direction advances and not every node is visited.
    Stuck,
    /// Shooter: all lives lost in this attempt.
    Dead,
    Surrendered,
    Skipped,
}

impl StageStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, StageStatus::Won | StageStatus::Surrendered | StageStatus::Skipped)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StageStatus::Playing => "playing",
            StageStatus::Won => "won",
            StageStatus::TimeExpired => "time_expired",
            StageStatus::OutOfMoves => "out_of_moves",
            StageStatus::Stuck => "stuck",
            StageStatus::Dead => "dead",
            StageStatus::Surrendered => "surrendered",
            StageStatus::Skipped => "skipped",
        }
    }
}

/// Why a move was refused. Refused moves leave state untouched and are not
/// counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    OutOfBounds,
    Occupied,
    NotAdjacent,
    AxisLocked,
    NoAdvance,
    UnknownPiece,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("operation requires a playing stage, status is {0}")]
    NotPlaying(&'static str),
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("guesses are not accepted during the exposure phase")]
    ExposurePhase,
    #[error("slot {0} is out of range or already matched")]
    BadSlot(usize),
    #[error("a guess needs two distinct slots")]
    SameSlot,
    #[error("skip wallet is empty")]
    WalletEmpty,
    #[error("{0}")]
    Rule(String),
    #[error("invalid level: {0}")]
    InvalidLevel(String),
}

/// Progress bookkeeping shared by the puzzle games: status, accepted-move
/// counter and the stage clock.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub status: StageStatus,
    pub moves_used: u32,
    pub elapsed_ms: u64,
    pub time_limit_ms: u64,
    /// Set once the time limit has been crossed.
    pub expired: bool,
    /// Set once the player chose to keep playing past the time limit.
    pub over_time: bool,
    pub restarts: u32,
}

impl Attempt {
    pub fn new(time_limit_s: u32) -> Self {
        Attempt {
            status: StageStatus::Playing,
            moves_used: 0,
            elapsed_ms: 0,
            time_limit_ms: u64::from(time_limit_s) * 1000,
            expired: false,
            over_time: false,
            restarts: 0,
        }
    }

    pub fn ensure_playing(&self) -> Result<(), GameError> {
        if self.status == StageStatus::Playing {
            Ok(())
        } else {
            Err(GameError::NotPlaying(self.status.as_str()))
        }
    }

    /// Advances gameplay time. Returns a `time_expired` event the first time
    /// the limit is crossed; a playing attempt then waits for the player to
    /// continue or surrender.
    pub fn advance(&mut self, ms: u64) -> Option<crate::telemetry::event::Emitted> {
        use crate::telemetry::event::{Emitted, EventType};
        self.elapsed_ms = self.elapsed_ms.saturating_add(ms);
        if self.expired || self.status.is_terminal() || self.time_limit_ms == 0 {
            return None;
        }
        if self.elapsed_ms < self.time_limit_ms {
            return None;
        }
        self.expired = true;
        if self.status == StageStatus::Playing {
            self.status = StageStatus::TimeExpired;
        }
        Some(Emitted::new(EventType::TimeExpired).with("elapsed_ms", self.elapsed_ms as i64))
    }

    /// Resolves a time-expiry prompt in favour of playing on.
    pub fn continue_over_time(&mut self) -> Result<(), GameError> {
        if !self.expired {
            return Err(GameError::Rule("no time-expiry prompt to continue from".into()));
        }
        if self.status == StageStatus::TimeExpired {
            self.status = StageStatus::Playing;
        }
        self.over_time = true;
        Ok(())
    }

    /// Starts a fresh attempt of the same stage. The stage clock keeps running.
    pub fn restart(&mut self) -> Result<(), GameError> {
        if self.status.is_terminal() {
            return Err(GameError::NotPlaying(self.status.as_str()));
        }
        if self.status == StageStatus::TimeExpired {
            self.over_time = true;
        }
        self.status = StageStatus::Playing;
        self.moves_used = 0;
        self.restarts += 1;
        Ok(())
    }
}
