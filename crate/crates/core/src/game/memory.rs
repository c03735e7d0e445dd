//! Memory matching: numbers are shown for a fixed exposure window, then
//! hidden; the player pairs slots from memory.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{GameError, StageStatus};
use crate::rng;
use crate::telemetry::event::{Emitted, EventType};

fn default_exposure_ms() -> u64 {
    5000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryLevel {
    pub stage_id: u8,
    pub pair_count: u32,
    #[serde(default = "default_exposure_ms")]
    pub exposure_ms: u64,
    #[serde(default)]
    pub tutorial: String,
}

impl MemoryLevel {
    pub fn validate(&self) -> Result<(), GameError> {
        if self.pair_count == 0 {
            return Err(GameError::InvalidLevel(format!("memory stage {}: pair_count must be positive", self.stage_id)));
        }
        Ok(())
    }

    pub fn card_count(&self) -> usize {
        2 * self.pair_count as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryPhase {
    Exposure,
    Recall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryState {
    pub level: MemoryLevel,
    pub layout: Vec<u32>,
    pub revealed: BTreeSet<usize>,
    pub phase: MemoryPhase,
    pub guesses_total: u32,
    pub guesses_correct: u32,
    pub guesses_incorrect: u32,
    pub status: StageStatus,
    pub restarts: u32,
}

/// Deals a seeded uniform shuffle of `1..=pair_count`, each number twice.
pub fn deal(pair_count: u32, seed: u64) -> Vec<u32> {
    let mut layout: Vec<u32> = (1..=pair_count).flat_map(|n| [n, n]).collect();
    layout.shuffle(&mut rng::seeded(seed));
    layout
}

impl MemoryState {
    pub fn begin(level: MemoryLevel, seed: u64) -> Self {
        let layout = deal(level.pair_count, seed);
        MemoryState {
            level,
            layout,
            revealed: BTreeSet::new(),
            phase: MemoryPhase::Exposure,
            guesses_total: 0,
            guesses_correct: 0,
            guesses_incorrect: 0,
            status: StageStatus::Playing,
            restarts: 0,
        }
    }

    /// The exposure window has elapsed; cards flip face down.
    pub fn reveal_elapsed(&mut self) {
        self.phase = MemoryPhase::Recall;
    }

    pub fn is_matched(&self, slot: usize) -> bool {
        self.revealed.contains(&slot)
    }

    pub fn guess(&mut self, a: usize, b: usize) -> Result<(bool, Vec<Emitted>), GameError> {
        if self.status != StageStatus::Playing {
            return Err(GameError::NotPlaying(self.status.as_str()));
        }
        if self.phase == MemoryPhase::Exposure {
            return Err(GameError::ExposurePhase);
        }
        if a == b {
            return Err(GameError::SameSlot);
        }
        for s in [a, b] {
            if s >= self.layout.len() || self.revealed.contains(&s) {
                return Err(GameError::BadSlot(s));
            }
        }
        let correct = self.layout[a] == self.layout[b];
        self.guesses_total += 1;
        if correct {
            self.guesses_correct += 1;
            self.revealed.insert(a);
            self.revealed.insert(b);
        } else {
            self.guesses_incorrect += 1;
        }
        let mut events = vec![Emitted::new(EventType::Guess)
            .with("slot_a", a)
            .with("slot_b", b)
            .with("correct", correct)];
        if self.revealed.len() == self.layout.len() {
            self.status = StageStatus::Won;
            events.push(Emitted::new(EventType::Win).with("guesses_total", self.guesses_total));
        }
        Ok((correct, events))
    }

    /// Same layout, shown again; attempt-local counters reset.
    pub fn restart(&mut self) -> Result<(), GameError> {
        if self.status.is_terminal() {
            return Err(GameError::NotPlaying(self.status.as_str()));
        }
        self.revealed.clear();
        self.phase = MemoryPhase::Exposure;
        self.guesses_total = 0;
        self.guesses_correct = 0;
        self.guesses_incorrect = 0;
        self.restarts += 1;
        Ok(())
    }
}
