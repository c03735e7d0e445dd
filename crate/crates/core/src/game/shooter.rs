//! Lane-discretised galaxy shooter on a fixed logical tick.
//!
//! The player sits on the bottom row and moves between lanes (wrapping at the
//! edges). Entities spawn on the top row and fall; projectiles rise one row
//! per tick. Surviving the stage duration with lives left wins. Given the
//! same level, seed and input script the run is bit-for-bit reproducible.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{GameError, StageStatus};
use crate::rng::Rng;
use crate::telemetry::event::{Emitted, EventType};

pub const TICK_MS: u64 = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpawnTable {
    pub enemy_offensive: f64,
    pub enemy_defensive: f64,
    pub enemy_score: f64,
    pub asteroid: f64,
    pub power_up: f64,
    pub gold: f64,
}

impl SpawnTable {
    pub fn empty() -> Self {
        SpawnTable { enemy_offensive: 0.0, enemy_defensive: 0.0, enemy_score: 0.0, asteroid: 0.0, power_up: 0.0, gold: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChallengeTargets {
    pub enemies_destroyed: u32,
    pub asteroids_destroyed: u32,
    pub gold_collected: u32,
    pub score: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShooterLevel {
    pub stage_id: u8,
    pub lanes: u8,
    pub rows: u8,
    pub duration_s: u32,
    pub lives: u32,
    #[serde(default = "default_max_lives")]
    pub max_lives: u32,
    pub fire_cooldown_ticks: u32,
    pub spawn: SpawnTable,
    pub challenges: ChallengeTargets,
    #[serde(default)]
    pub tutorial: String,
}

fn default_max_lives() -> u32 {
    5
}

impl ShooterLevel {
    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: &str| Err(GameError::InvalidLevel(format!("shooter stage {}: {m}", self.stage_id)));
        if self.lanes < 2 || self.rows < 4 {
            return bad("needs at least 2 lanes and 4 rows");
        }
        if self.duration_s == 0 || self.lives == 0 {
            return bad("duration_s and lives must be positive");
        }
        let s = &self.spawn;
        for p in [s.enemy_offensive, s.enemy_defensive, s.enemy_score, s.asteroid, s.power_up, s.gold] {
            if !(0.0..=1.0).contains(&p) {
                return bad("spawn probabilities must lie in [0,1]");
            }
        }
        Ok(())
    }

    pub fn total_ticks(&self) -> u64 {
        u64::from(self.duration_s) * 1000 / TICK_MS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnemyKind {
    Offensive,
    Defensive,
    Score,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Enemy(EnemyKind),
    Asteroid,
    PowerUp,
    Gold,
}

impl EntityKind {
    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Enemy(EnemyKind::Offensive) => "enemy_offensive",
            EntityKind::Enemy(EnemyKind::Defensive) => "enemy_defensive",
            EntityKind::Enemy(EnemyKind::Score) => "enemy_score",
            EntityKind::Asteroid => "asteroid",
            EntityKind::PowerUp => "power_up",
            EntityKind::Gold => "gold",
        }
    }

    /// Ticks per row of descent.
    pub fn fall_ticks(self) -> u32 {
        match self {
            EntityKind::Enemy(EnemyKind::Offensive) => 4,
            EntityKind::Enemy(EnemyKind::Defensive) => 8,
            EntityKind::Enemy(EnemyKind::Score) => 6,
            EntityKind::Asteroid => 5,
            EntityKind::PowerUp | EntityKind::Gold => 6,
        }
    }

    fn hit_points(self) -> u32 {
        match self {
            EntityKind::Enemy(EnemyKind::Defensive) => 2,
            _ => 1,
        }
    }

    fn destroy_score(self) -> u32 {
        match self {
            EntityKind::Enemy(EnemyKind::Score) => 50,
            EntityKind::Enemy(_) => 10,
            EntityKind::Asteroid => 5,
            EntityKind::PowerUp | EntityKind::Gold => 0,
        }
    }

    pub fn is_hazard(self) -> bool {
        matches!(self, EntityKind::Enemy(_) | EntityKind::Asteroid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entity {
    pub kind: EntityKind,
    pub lane: u8,
    pub row: u8,
    pub hp: u32,
    pub fall_timer: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Projectile {
    pub lane: u8,
    pub row: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShooterInput {
    None,
    Left,
    Right,
    Fire,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShooterCounters {
    pub shots_fired: u32,
    pub enemies_generated: u32,
    pub enemies_destroyed: u32,
    pub enemy_collisions: u32,
    pub asteroids_generated: u32,
    pub asteroids_destroyed: u32,
    pub asteroid_collisions: u32,
    pub gold_generated: u32,
    pub gold_collected: u32,
    pub gold_lost: u32,
    pub gold_exploded: u32,
    pub powerups_generated: u32,
    pub powerups_collected: u32,
    pub moves_left: u32,
    pub moves_right: u32,
    pub boundary_exits_left: u32,
    pub boundary_exits_right: u32,
    pub lives_lost: u32,
}

/// The six optional shooter challenges, in display order.
pub const CHALLENGES: [&str; 6] =
    ["life_survival", "enemy_elimination", "asteroid_destruction", "gold_collection", "no_weapon", "score_achievement"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShooterState {
    pub level: ShooterLevel,
    pub tick: u64,
    pub elapsed_ms: u64,
    pub lives: u32,
    pub score: u32,
    pub player_col: u8,
    pub entities: Vec<Entity>,
    pub projectiles: Vec<Projectile>,
    pub cooldown: u32,
    pub counters: ShooterCounters,
    pub challenge_flags: [bool; 6],
    pub status: StageStatus,
    pub restarts: u32,
    pub failed_attempts: u32,
}

impl ShooterState {
    pub fn new(level: ShooterLevel) -> Self {
        let lives = level.lives;
        let player_col = level.lanes / 2;
        ShooterState {
            level,
            tick: 0,
            elapsed_ms: 0,
            lives,
            score: 0,
            player_col,
            entities: Vec::new(),
            projectiles: Vec::new(),
            cooldown: 0,
            counters: ShooterCounters::default(),
            challenge_flags: [false; 6],
            status: StageStatus::Playing,
            restarts: 0,
            failed_attempts: 0,
        }
    }

    pub fn player_row(&self) -> u8 {
        self.level.rows - 1
    }

    /// Surrender becomes available after three failed attempts.
    pub fn may_surrender(&self) -> bool {
        self.failed_attempts >= 3
    }

    /// A new attempt after a death; counters and entities reset.
    pub fn restart(&mut self) -> Result<(), GameError> {
        if self.status.is_terminal() {
            return Err(GameError::NotPlaying(self.status.as_str()));
        }
        let mut fresh = ShooterState::new(self.level.clone());
        fresh.restarts = self.restarts + 1;
        fresh.failed_attempts = self.failed_attempts;
        *self = fresh;
        Ok(())
    }

    fn set_challenge(&mut self, idx: usize, out: &mut Vec<Emitted>) {
        if !self.challenge_flags[idx] {
            self.challenge_flags[idx] = true;
            out.push(Emitted::new(EventType::ChallengeComplete).with("challenge", CHALLENGES[idx]));
        }
    }

    fn destroy(&mut self, idx: usize, out: &mut Vec<Emitted>) {
        let e = self.entities[idx];
        match e.kind {
            EntityKind::Enemy(_) => self.counters.enemies_destroyed += 1,
            EntityKind::Asteroid => self.counters.asteroids_destroyed += 1,
            EntityKind::Gold => self.counters.gold_exploded += 1,
            // Power-ups absorb shots without being destroyed.
            EntityKind::PowerUp => return,
        }
        self.score += e.kind.destroy_score();
        out.push(Emitted::new(EventType::Destroy).with("entity", e.kind.name()).with("lane", i64::from(e.lane)));
        self.entities.remove(idx);
    }

    fn resolve_hits(&mut self, out: &mut Vec<Emitted>) {
        let mut p = 0;
        while p < self.projectiles.len() {
            let proj = self.projectiles[p];
            let hit = self
                .entities
                .iter()
                .position(|e| e.lane == proj.lane && (e.row == proj.row || e.row == proj.row + 1) && e.kind != EntityKind::PowerUp);
            if let Some(i) = hit {
                self.projectiles.remove(p);
                self.entities[i].hp = self.entities[i].hp.saturating_sub(1);
                if self.entities[i].hp == 0 {
                    self.destroy(i, out);
                }
            } else {
                p += 1;
            }
        }
    }

    fn spawn(&mut self, kind: EntityKind, rng: &mut Rng, out: &mut Vec<Emitted>) {
        let lane = rng.gen_range(0..self.level.lanes);
        match kind {
            EntityKind::Enemy(_) => self.counters.enemies_generated += 1,
            EntityKind::Asteroid => self.counters.asteroids_generated += 1,
            EntityKind::Gold => self.counters.gold_generated += 1,
            EntityKind::PowerUp => self.counters.powerups_generated += 1,
        }
        self.entities.push(Entity { kind, lane, row: 0, hp: kind.hit_points(), fall_timer: 0 });
        out.push(Emitted::new(EventType::Spawn).with("entity", kind.name()).with("lane", i64::from(lane)));
    }

    /// Advances one logical tick.
    pub fn tick(&mut self, input: ShooterInput, rng: &mut Rng) -> Result<Vec<Emitted>, GameError> {
        if self.status != StageStatus::Playing {
            return Err(GameError::NotPlaying(self.status.as_str()));
        }
        let mut out = Vec::new();
        let lanes = self.level.lanes;

        match input {
            ShooterInput::Left | ShooterInput::Right => {
                let left = input == ShooterInput::Left;
                let exit = if left { self.player_col == 0 } else { self.player_col + 1 == lanes };
                self.player_col = match (left, exit) {
                    (true, true) => lanes - 1,
                    (true, false) => self.player_col - 1,
                    (false, true) => 0,
                    (false, false) => self.player_col + 1,
                };
                if left {
                    self.counters.moves_left += 1;
                    self.counters.boundary_exits_left += u32::from(exit);
                } else {
                    self.counters.moves_right += 1;
                    self.counters.boundary_exits_right += u32::from(exit);
                }
                out.push(
                    Emitted::new(EventType::MoveAccepted)
                        .with("direction", if left { "left" } else { "right" })
                        .with("boundary_exit", exit)
                        .with("lane", i64::from(self.player_col)),
                );
            }
            ShooterInput::Fire if self.cooldown == 0 => {
                self.counters.shots_fired += 1;
                self.cooldown = self.level.fire_cooldown_ticks;
                self.projectiles.push(Projectile { lane: self.player_col, row: self.player_row() });
                out.push(Emitted::new(EventType::Shot).with("lane", i64::from(self.player_col)));
            }
            _ => {}
        }
        self.cooldown = self.cooldown.saturating_sub(1);

        // Projectiles rise one row; those leaving the top vanish.
        self.projectiles.retain_mut(|p| {
            if p.row == 0 {
                false
            } else {
                p.row -= 1;
                true
            }
        });
        self.resolve_hits(&mut out);

        // Entities fall at their own pace.
        for e in &mut self.entities {
            e.fall_timer += 1;
            if e.fall_timer >= e.kind.fall_ticks() {
                e.fall_timer = 0;
                e.row += 1;
            }
        }
        self.resolve_hits(&mut out);

        // Contact with the player row.
        let prow = self.player_row();
        let mut i = 0;
        while i < self.entities.len() {
            let e = self.entities[i];
            if e.row == prow && e.lane == self.player_col {
                match e.kind {
                    EntityKind::Enemy(_) | EntityKind::Asteroid => {
                        if e.kind == EntityKind::Asteroid {
                            self.counters.asteroid_collisions += 1;
                        } else {
                            self.counters.enemy_collisions += 1;
                        }
                        self.lives = self.lives.saturating_sub(1);
                        self.counters.lives_lost += 1;
                        out.push(
                            Emitted::new(EventType::Collision)
                                .with("entity", e.kind.name())
                                .with("lives", self.lives),
                        );
                    }
                    EntityKind::Gold => {
                        self.counters.gold_collected += 1;
                        self.score += 20;
                        out.push(Emitted::new(EventType::Collect).with("entity", "gold"));
                    }
                    EntityKind::PowerUp => {
                        self.counters.powerups_collected += 1;
                        self.lives = (self.lives + 1).min(self.level.max_lives);
                        out.push(Emitted::new(EventType::Collect).with("entity", "power_up"));
                    }
                }
                self.entities.remove(i);
            } else if e.row > prow {
                if e.kind == EntityKind::Gold {
                    self.counters.gold_lost += 1;
                }
                out.push(Emitted::new(EventType::Escape).with("entity", e.kind.name()));
                self.entities.remove(i);
            } else {
                i += 1;
            }
        }

        let s = self.level.spawn.clone();
        let table = [
            (EntityKind::Enemy(EnemyKind::Offensive), s.enemy_offensive),
            (EntityKind::Enemy(EnemyKind::Defensive), s.enemy_defensive),
            (EntityKind::Enemy(EnemyKind::Score), s.enemy_score),
            (EntityKind::Asteroid, s.asteroid),
            (EntityKind::PowerUp, s.power_up),
            (EntityKind::Gold, s.gold),
        ];
        for (kind, p) in table {
            // Always draw so the stream position does not depend on the table.
            let roll: f64 = rng.gen();
            if roll < p {
                self.spawn(kind, rng, &mut out);
            }
        }

        let c = self.level.challenges.clone();
        if self.counters.enemies_destroyed >= c.enemies_destroyed {
            self.set_challenge(1, &mut out);
        }
        if self.counters.asteroids_destroyed >= c.asteroids_destroyed {
            self.set_challenge(2, &mut out);
        }
        if self.counters.gold_collected >= c.gold_collected {
            self.set_challenge(3, &mut out);
        }
        if self.score >= c.score {
            self.set_challenge(5, &mut out);
        }

        self.tick += 1;
        self.elapsed_ms += TICK_MS;
        if self.lives == 0 {
            self.failed_attempts += 1;
            self.status = StageStatus::Dead;
            out.push(Emitted::new(EventType::Lose).with("reason", "dead").with("score", self.score));
        } else if self.elapsed_ms >= u64::from(self.level.duration_s) * 1000 {
            if self.counters.lives_lost == 0 {
                self.set_challenge(0, &mut out);
            }
            if self.counters.shots_fired == 0 {
                self.set_challenge(4, &mut out);
            }
            self.status = StageStatus::Won;
            out.push(Emitted::new(EventType::Win).with("score", self.score).with("lives", self.lives));
        }
        Ok(out)
    }

    pub fn is_dead(&self) -> bool {
        self.status == StageStatus::Dead
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    pub(crate) fn quiet_level() -> ShooterLevel {
        ShooterLevel {
            stage_id: 1,
            lanes: 5,
            rows: 10,
            duration_s: 120,
            lives: 3,
            max_lives: 5,
            fire_cooldown_ticks: 3,
            spawn: SpawnTable::empty(),
            challenges: ChallengeTargets { enemies_destroyed: 5, asteroids_destroyed: 5, gold_collected: 3, score: 200 },
            tutorial: String::new(),
        }
    }

    fn busy_level() -> ShooterLevel {
        let mut l = quiet_level();
        l.spawn = SpawnTable {
            enemy_offensive: 0.04,
            enemy_defensive: 0.02,
            enemy_score: 0.01,
            asteroid: 0.04,
            power_up: 0.01,
            gold: 0.03,
        };
        l
    }

    #[test]
    fn left_at_leftmost_lane_wraps_and_counts_exit() {
        let mut s = ShooterState::new(quiet_level());
        s.player_col = 0;
        let mut r = rng::seeded(1);
        s.tick(ShooterInput::Left, &mut r).unwrap();
        assert_eq!(s.player_col, 4);
        assert_eq!(s.counters.boundary_exits_left, 1);
        assert_eq!(s.counters.moves_left, 1);
    }

    #[test]
    fn empty_level_is_won_by_waiting() {
        let mut s = ShooterState::new(quiet_level());
        let mut r = rng::seeded(1);
        let mut ticks = 0;
        while s.status == StageStatus::Playing {
            s.tick(ShooterInput::None, &mut r).unwrap();
            ticks += 1;
        }
        assert_eq!(ticks, 2400);
        assert_eq!(s.status, StageStatus::Won);
        assert_eq!(s.lives, 3);
        assert!(s.challenge_flags[0] && s.challenge_flags[4]);
    }

    fn script(i: u64) -> ShooterInput {
        match (i * 7919) % 11 {
            0 | 1 => ShooterInput::Left,
            2 | 3 => ShooterInput::Right,
            4..=6 => ShooterInput::Fire,
            _ => ShooterInput::None,
        }
    }

    fn run(seed: u64) -> (ShooterCounters, Vec<Emitted>, StageStatus) {
        let mut s = ShooterState::new(busy_level());
        let mut r = rng::seeded(seed);
        let mut events = Vec::new();
        let mut i = 0;
        while s.status == StageStatus::Playing {
            events.extend(s.tick(script(i), &mut r).unwrap());
            i += 1;
        }
        (s.counters, events, s.status)
    }

    #[test]
    fn replay_is_deterministic() {
        assert_eq!(run(99), run(99));
    }

    #[test]
    fn conservation_holds_every_tick() {
        let mut s = ShooterState::new(busy_level());
        let mut r = rng::seeded(5);
        let mut i = 0;
        while s.status == StageStatus::Playing {
            s.tick(script(i), &mut r).unwrap();
            let c = &s.counters;
            assert!(c.gold_collected + c.gold_lost + c.gold_exploded <= c.gold_generated);
            assert!(c.powerups_collected <= c.powerups_generated);
            assert!(c.enemies_destroyed + c.enemy_collisions <= c.enemies_generated);
            i += 1;
        }
    }

    #[test]
    fn dying_counts_a_failed_attempt_and_restart_resets() {
        let mut l = busy_level();
        l.spawn.enemy_offensive = 0.5;
        l.lives = 1;
        let mut s = ShooterState::new(l);
        let mut r = rng::seeded(3);
        while s.status == StageStatus::Playing {
            s.tick(ShooterInput::None, &mut r).unwrap();
        }
        assert_eq!(s.status, StageStatus::Dead);
        assert_eq!(s.failed_attempts, 1);
        assert!(!s.may_surrender());
        s.restart().unwrap();
        assert_eq!(s.status, StageStatus::Playing);
        assert_eq!(s.restarts, 1);
        assert_eq!(s.counters, ShooterCounters::default());
    }
}
