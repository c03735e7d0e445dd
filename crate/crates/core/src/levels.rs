//! Level packs: one TOML document per game, each tagged with a schema id.
//!
//! ```toml
//! schema = "assess.levels/v1"
//! game = "group_swap"
//!
//! [[levels]]
//! stage_id = "tutorial"
//! rows = 2
//! ...
//! ```
//!
//! The `meta` document carries the side-challenge item bank instead of
//! levels.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::graph::GraphLevel;
use crate::game::groupswap::GroupSwapLevel;
use crate::game::memory::MemoryLevel;
use crate::game::shooter::ShooterLevel;
use crate::game::sliding::SlidingPathLevel;
use crate::game::GameError;
use crate::telemetry::event::GameId;

pub const LEVEL_SCHEMA: &str = "assess.levels/v1";

#[derive(Debug, Error)]
pub enum LevelError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing {doc}: {message}")]
    Parse { doc: String, message: String },
    #[error("{doc}: expected schema `{LEVEL_SCHEMA}`, found `{found}`")]
    Schema { doc: String, found: String },
    #[error("{doc}: document declares game `{found}`")]
    WrongGame { doc: String, found: String },
    #[error(transparent)]
    Invalid(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChallengeKind {
    Arithmetic,
    Logic,
}

/// An optional quiz that earns a skip token when answered correctly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideChallenge {
    pub id: String,
    pub kind: ChallengeKind,
    pub prompt: String,
    pub answer: String,
    /// Relative difficulty in [1, 5].
    #[serde(default = "one")]
    pub difficulty: u8,
}

fn one() -> u8 {
    1
}

impl SideChallenge {
    pub fn check(&self, answer: &str) -> bool {
        answer.trim().eq_ignore_ascii_case(self.answer.trim())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Document<T> {
    schema: String,
    game: String,
    #[serde(default = "Vec::new")]
    levels: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MetaDocument {
    schema: String,
    game: String,
    #[serde(default)]
    side_challenges: Vec<SideChallenge>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelPack {
    pub group_swap: Vec<GroupSwapLevel>,
    pub sliding_path: Vec<SlidingPathLevel>,
    pub memory: Vec<MemoryLevel>,
    pub shooter: Vec<ShooterLevel>,
    pub graph: Vec<GraphLevel>,
    pub side_challenges: Vec<SideChallenge>,
}

const DEFAULT_DOCS: [(GameId, &str); 6] = [
    (GameId::GroupSwap, include_str!("../levels/group_swap.toml")),
    (GameId::SlidingPath, include_str!("../levels/sliding_path.toml")),
    (GameId::Memory, include_str!("../levels/memory.toml")),
    (GameId::Shooter, include_str!("../levels/shooter.toml")),
    (GameId::Graph, include_str!("../levels/graph.toml")),
    (GameId::Meta, include_str!("../levels/meta.toml")),
];

fn parse_doc<T: DeserializeOwned>(game: GameId, text: &str) -> Result<Vec<T>, LevelError> {
    let doc: Document<T> =
        toml::from_str(text).map_err(|e| LevelError::Parse { doc: game.to_string(), message: e.to_string() })?;
    check_header(game, &doc.schema, &doc.game)?;
    Ok(doc.levels)
}

fn check_header(game: GameId, schema: &str, declared: &str) -> Result<(), LevelError> {
    if schema != LEVEL_SCHEMA {
        return Err(LevelError::Schema { doc: game.to_string(), found: schema.to_owned() });
    }
    if declared != game.as_str() {
        return Err(LevelError::WrongGame { doc: game.to_string(), found: declared.to_owned() });
    }
    Ok(())
}

impl LevelPack {
    /// The level pack shipped with the crate.
    pub fn default_pack() -> LevelPack {
        let mut pack = LevelPack::default();
        for (game, text) in DEFAULT_DOCS {
            pack.load_doc(game, text).expect("shipped level pack parses");
        }
        pack
    }

    /// Parses one game document into the pack, replacing that game's levels.
    pub fn load_doc(&mut self, game: GameId, text: &str) -> Result<(), LevelError> {
        match game {
            GameId::GroupSwap => self.group_swap = parse_doc(game, text)?,
            GameId::SlidingPath => self.sliding_path = parse_doc(game, text)?,
            GameId::Memory => self.memory = parse_doc(game, text)?,
            GameId::Shooter => self.shooter = parse_doc(game, text)?,
            GameId::Graph => self.graph = parse_doc(game, text)?,
            GameId::Meta => {
                let doc: MetaDocument = toml::from_str(text)
                    .map_err(|e| LevelError::Parse { doc: game.to_string(), message: e.to_string() })?;
                check_header(game, &doc.schema, &doc.game)?;
                self.side_challenges = doc.side_challenges;
            }
        }
        Ok(())
    }

    /// Loads `<game>.toml` documents from `dir`; missing documents leave that
    /// game empty.
    pub fn load_dir(dir: &Path) -> Result<LevelPack, LevelError> {
        if !dir.is_dir() {
            let source = std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory");
            return Err(LevelError::Io { path: dir.display().to_string(), source });
        }
        let mut pack = LevelPack::default();
        for game in GameId::ALL {
            let path = dir.join(format!("{}.toml", game.as_str()));
            if !path.exists() {
                continue;
            }
            let text = fs::read_to_string(&path)
                .map_err(|source| LevelError::Io { path: path.display().to_string(), source })?;
            pack.load_doc(game, &text)?;
        }
        Ok(pack)
    }

    /// Loads from `path` if given, else the shipped pack.
    pub fn load_or_default(path: Option<&Path>) -> Result<LevelPack, LevelError> {
        match path {
            Some(p) => LevelPack::load_dir(p),
            None => Ok(LevelPack::default_pack()),
        }
    }

    /// Writes one TOML document per game into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), LevelError> {
        fs::create_dir_all(dir).map_err(|source| LevelError::Io { path: dir.display().to_string(), source })?;
        for game in GameId::ALL {
            let text = self.document(game);
            let path = dir.join(format!("{}.toml", game.as_str()));
            fs::write(&path, text).map_err(|source| LevelError::Io { path: path.display().to_string(), source })?;
        }
        Ok(())
    }

    /// Serializes the slice of the pack belonging to `game`.
    pub fn document(&self, game: GameId) -> String {
        fn doc<T: Serialize + Clone>(game: GameId, levels: &[T]) -> String {
            let d = Document { schema: LEVEL_SCHEMA.to_owned(), game: game.as_str().to_owned(), levels: levels.to_vec() };
            toml::to_string(&d).expect("levels serialize")
        }
        match game {
            GameId::GroupSwap => doc(game, &self.group_swap),
            GameId::SlidingPath => doc(game, &self.sliding_path),
            GameId::Memory => doc(game, &self.memory),
            GameId::Shooter => doc(game, &self.shooter),
            GameId::Graph => doc(game, &self.graph),
            GameId::Meta => {
                let d = MetaDocument {
                    schema: LEVEL_SCHEMA.to_owned(),
                    game: game.as_str().to_owned(),
                    side_challenges: self.side_challenges.clone(),
                };
                toml::to_string(&d).expect("side challenges serialize")
            }
        }
    }

    /// The JSON slice served to clients for `game`.
    pub fn slice_json(&self, game: GameId) -> serde_json::Value {
        let levels = match game {
            GameId::GroupSwap => serde_json::to_value(&self.group_swap),
            GameId::SlidingPath => serde_json::to_value(&self.sliding_path),
            GameId::Memory => serde_json::to_value(&self.memory),
            GameId::Shooter => serde_json::to_value(&self.shooter),
            GameId::Graph => serde_json::to_value(&self.graph),
            GameId::Meta => serde_json::to_value(&self.side_challenges),
        }
        .expect("levels serialize");
        serde_json::json!({ "schema": LEVEL_SCHEMA, "game": game.as_str(), "levels": levels })
    }

    pub fn is_empty(&self) -> bool {
        self.group_swap.is_empty()
            && self.sliding_path.is_empty()
            && self.memory.is_empty()
            && self.shooter.is_empty()
            && self.graph.is_empty()
    }

    /// Structural checks on every level (solvability is checked by the
    /// solvers).
    pub fn validate_structure(&self) -> Result<(), GameError> {
        self.group_swap.iter().try_for_each(GroupSwapLevel::validate)?;
        self.sliding_path.iter().try_for_each(SlidingPathLevel::validate)?;
        self.memory.iter().try_for_each(MemoryLevel::validate)?;
        self.shooter.iter().try_for_each(ShooterLevel::validate)?;
        self.graph.iter().try_for_each(GraphLevel::validate)?;
        for w in self.memory.windows(2) {
            if w[1].pair_count <= w[0].pair_count {
                return Err(GameError::InvalidLevel("memory pair_count must increase across stages".into()));
            }
        }
        Ok(())
    }
}
