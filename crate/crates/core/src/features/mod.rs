//! Feature extraction from session logs and the preprocessing stack.

pub mod catalog;
pub mod preprocess;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::agents::cohort::Demographics;
use crate::telemetry::event::{EventType, GameEvent, GameId};
use crate::telemetry::session::SessionLog;
use catalog::{catalog, zero_flag_name, Source, VarType};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("undefined correlation: {0}")]
    Undefined(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Number(f64),
    Bool(bool),
    /// Label plus the ordinal used in numeric matrices.
    Enum(String, u32),
    Text(String),
    Missing,
}

impl FeatureValue {
    /// Matrix encoding; `NaN` marks missing and non-numeric values.
    pub fn numeric(&self) -> f64 {
        match self {
            FeatureValue::Number(v) => *v,
            FeatureValue::Bool(b) => f64::from(u8::from(*b)),
            FeatureValue::Enum(_, code) => f64::from(*code),
            FeatureValue::Text(_) | FeatureValue::Missing => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub session_id: String,
    /// Catalog variables in catalog order, then one `[0/0]` flag per ratio.
    pub values: Vec<(String, FeatureValue)>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<&FeatureValue> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn number(&self, name: &str) -> Option<f64> {
        self.get(name).map(FeatureValue::numeric)
    }
}

/// Ratios and their (numerator, denominator) base fields. A zero denominator
/// yields 0 and sets the companion flag.
pub const RATIOS: [(&str, &str, &str); 17] = [
    ("Gameplay Logs per Minute", "Total Gameplay Log Count", "Total Gameplay Duration in Minutes"),
    ("Pauses per Minute", "Total Gameplay Pause Count", "Total Gameplay Duration in Minutes"),
    ("Side Challenges: Success Ratio", "Side Challenges: Completed Count", "Side Challenges: Attempt Count"),
    ("Tutorial Engagement Ratio", "Tutorial Engagement Count", "Tutorial Interaction Count"),
    ("Puzzle Games: Mean Moves per Win", "Puzzle Games: Winning Move Count", "Puzzle Games: Total Win Count"),
    ("Puzzle Games: Restarts per Stage", "Puzzle Games: Restart Count", "Puzzle Games: Stage Count"),
    ("Memory Matching Game: Guess Accuracy Ratio", "Memory Matching Game: Correct Guess Count", "Memory Matching Game: Total Guess Count"),
    (
        "Galaxy Shooter Game: Gameplay Logs per Minute",
        "Galaxy Shooter Game: Gameplay Log Count",
        "Galaxy Shooter Game: Gameplay Duration in Minutes",
    ),
    ("Galaxy Shooter Game: Wins per Minute", "Galaxy Shooter Game: Win Count", "Galaxy Shooter Game: Gameplay Duration in Minutes"),
    ("Galaxy Shooter Game: Shots per Minute", "Galaxy Shooter Game: Total Shots Fired", "Galaxy Shooter Game: Gameplay Duration in Minutes"),
    ("Galaxy Shooter Game: Shots per Gameplay Log", "Galaxy Shooter Game: Total Shots Fired", "Galaxy Shooter Game: Gameplay Log Count"),
    ("Galaxy Shooter Game: Lives Lost per Minute", "Galaxy Shooter Game: Total Lives Lost", "Galaxy Shooter Game: Gameplay Duration in Minutes"),
    ("Galaxy Shooter Game: Lives Lost per Gameplay Log", "Galaxy Shooter Game: Total Lives Lost", "Galaxy Shooter Game: Gameplay Log Count"),
    ("Galaxy Shooter Game: Power-Up Collection Efficiency Ratio", "Galaxy Shooter Game: Power-Ups Collected", "Galaxy Shooter Game: Power-Ups Generated"),
    ("Galaxy Shooter Game: Gold Collection Efficiency Ratio", "Galaxy Shooter Game: Gold Collected", "Galaxy Shooter Game: Gold Generated"),
    ("Galaxy Shooter Game: Enemy Collision Rate", "Galaxy Shooter Game: Enemy Collisions with Player", "Galaxy Shooter Game: Enemies Generated"),
    ("Galaxy Shooter Game: Asteroid Collision Rate", "Galaxy Shooter Game: Asteroid Collisions with Player", "Galaxy Shooter Game: Asteroids Generated"),
];

/// Ratios over directional counts: `a / (a + b)`.
pub const BIASES: [(&str, &str, &str); 2] = [
    (
        "Galaxy Shooter Game: Directional Movement Bias Ratio",
        "Galaxy Shooter Game: Leftward Movement Count",
        "Galaxy Shooter Game: Rightward Movement Count",
    ),
    (
        "Galaxy Shooter Game: Boundary Exit Bias Ratio",
        "Galaxy Shooter Game: Left Boundary Exit Count",
        "Galaxy Shooter Game: Right Boundary Exit Count",
    ),
];

fn game_prefix(g: GameId) -> &'static str {
    match g {
        GameId::GroupSwap => "Group-Swapping Puzzle Game",
        GameId::SlidingPath => "Obstacle-Rearrangement Path Game",
        GameId::Memory => "Memory Matching Game",
        GameId::Shooter => "Galaxy Shooter Game",
        GameId::Graph => "Graph Traversal Game",
        GameId::Meta => "Menu",
    }
}

fn count_name(g: GameId) -> String {
    match g {
        GameId::Shooter => format!("{}: Gameplay Log Count", game_prefix(g)),
        _ => format!("{}: Log Count", game_prefix(g)),
    }
}

#[derive(Default)]
struct Tally {
    by: HashMap<(GameId, EventType), u64>,
    logs: HashMap<GameId, u64>,
    ms: HashMap<GameId, u64>,
    total_ms: u64,
    paused_ms: u64,
    span_ms: u64,
    lose_reason: HashMap<(GameId, String), u64>,
    entity: HashMap<(EventType, String), u64>,
    challenges: HashMap<String, u64>,
    quiz_nav: u64,
    winning_moves: u64,
    shooter_max_score: u64,
    guesses_correct: u64,
    shooter_moves: [u64; 2],
    shooter_exits: [u64; 2],
}

impl Tally {
    fn of(&self, g: GameId, t: EventType) -> u64 {
        self.by.get(&(g, t)).copied().unwrap_or(0)
    }

    fn all(&self, t: EventType) -> u64 {
        GameId::ALL.iter().map(|&g| self.of(g, t)).sum()
    }

    fn puzzles(&self, t: EventType) -> u64 {
        GameId::ALL.iter().filter(|g| g.is_puzzle()).map(|&g| self.of(g, t)).sum()
    }

    fn entity(&self, t: EventType, name: &str) -> u64 {
        self.entity.get(&(t, name.to_owned())).copied().unwrap_or(0)
    }

    fn lose(&self, g: GameId, reason: &str) -> u64 {
        self.lose_reason.get(&(g, reason.to_owned())).copied().unwrap_or(0)
    }

    fn walk(events: &[GameEvent]) -> Tally {
        let mut t = Tally::default();
        if let (Some(a), Some(b)) = (events.first(), events.last()) {
            t.span_ms = b.timestamp_ms.saturating_sub(a.timestamp_ms);
        }
        for (i, e) in events.iter().enumerate() {
            *t.by.entry((e.game_id, e.event_type)).or_default() += 1;
            *t.logs.entry(e.game_id).or_default() += 1;
            if i > 0 {
                let prev = &events[i - 1];
                let gap = e.timestamp_ms.saturating_sub(prev.timestamp_ms);
                if prev.event_type == EventType::Pause {
                    t.paused_ms += gap;
                } else {
                    t.total_ms += gap;
                    if prev.game_id == e.game_id {
                        *t.ms.entry(e.game_id).or_default() += gap;
                    }
                }
            }
            match e.event_type {
                EventType::Lose => {
                    let reason = e.text("reason").unwrap_or("").to_owned();
                    *t.lose_reason.entry((e.game_id, reason)).or_default() += 1;
                }
                EventType::Spawn | EventType::Destroy | EventType::Collision | EventType::Collect | EventType::Escape => {
                    let name = e.text("entity").unwrap_or("").to_owned();
                    *t.entity.entry((e.event_type, name)).or_default() += 1;
                }
                EventType::ChallengeComplete => {
                    *t.challenges.entry(e.text("challenge").unwrap_or("").to_owned()).or_default() += 1;
                }
                EventType::MenuNav if e.text("screen") == Some("quiz") => t.quiz_nav += 1,
                EventType::Guess if e.flag("correct") == Some(true) => t.guesses_correct += 1,
                EventType::MoveAccepted if e.game_id == GameId::Shooter => {
                    let k = usize::from(e.text("direction") != Some("left"));
                    t.shooter_moves[k] += 1;
                    if e.flag("boundary_exit") == Some(true) {
                        t.shooter_exits[k] += 1;
                    }
                }
                _ => {}
            }
            if e.event_type == EventType::Win && e.game_id.is_puzzle() {
                t.winning_moves += e.int("moves_used").unwrap_or(0).max(0) as u64;
            }
            if e.game_id == GameId::Shooter && matches!(e.event_type, EventType::Win | EventType::Lose) {
                t.shooter_max_score = t.shooter_max_score.max(e.int("score").unwrap_or(0).max(0) as u64);
            }
        }
        t
    }
}

fn minutes(ms: u64) -> f64 {
    ms as f64 / 60_000.0
}

/// Computes the catalog for one session. Behavioural variables come from the
/// events alone; questionnaire variables come from `demographics` and are
/// missing without it.
pub fn extract_features(log: &SessionLog, demographics: Option<&Demographics>) -> Result<FeatureVector, FeatureError> {
    if !log.is_well_formed() {
        return Err(FeatureError::Integrity(format!("session `{}` has seq gaps or foreign events", log.session_id)));
    }
    if !log.finalized {
        return Err(FeatureError::Input(format!("session `{}` is not finalized", log.session_id)));
    }
    let t = Tally::walk(&log.events);
    let mut num: HashMap<String, f64> = HashMap::new();
    let mut put = |k: String, v: u64| {
        num.insert(k, v as f64);
    };
    use EventType as E;
    use GameId as G;

    put("Total Gameplay Log Count".into(), log.events.len() as u64);
    put("Total Gameplay Pause Count".into(), t.all(E::Pause));
    put("Total Game Restart Count".into(), t.all(E::Restart));
    for g in GameId::PLAYABLE {
        put(count_name(g), t.logs.get(&g).copied().unwrap_or(0));
        put(format!("{}: Win Count", game_prefix(g)), t.of(g, E::Win));
        put(format!("{}: Restart Count", game_prefix(g)), t.of(g, E::Restart));
        put(format!("{}: Surrender Action Count", game_prefix(g)), t.of(g, E::Surrender));
        put(format!("{}: Skip Token Usage Count", game_prefix(g)), t.of(g, E::Skip));
        put(format!("{}: Time Expiry Count", game_prefix(g)), t.of(g, E::TimeExpired));
        put(format!("{}: Accepted Move Count", game_prefix(g)), t.of(g, E::MoveAccepted));
        put(format!("{}: Out-of-Moves Count", game_prefix(g)), t.lose(g, "out_of_moves"));
    }
    put("Graph Traversal Game: Stuck Count".into(), t.lose(G::Graph, "stuck"));
    put("Memory Matching Game: Total Guess Count".into(), t.of(G::Memory, E::Guess));
    put("Memory Matching Game: Correct Guess Count".into(), t.guesses_correct);
    put("Memory Matching Game: Incorrect Guess Count".into(), t.of(G::Memory, E::Guess) - t.guesses_correct);
    put("Tutorial Engagement Count".into(), t.all(E::TutorialView));
    put("Tutorial Skipping Count".into(), t.all(E::TutorialSkip));
    put("Tutorial Interaction Count".into(), t.all(E::TutorialView) + t.all(E::TutorialSkip));
    put("Quiz Navigation Interaction Count".into(), t.quiz_nav);
    put("Menu Navigation Interaction Count".into(), t.of(G::Meta, E::MenuNav));
    put("Side Challenges: Attempt Count".into(), t.of(G::Meta, E::SideChallengeAttempt));
    put("Side Challenges: Completed Count".into(), t.of(G::Meta, E::SideChallengeSolved));
    put("Skip Tokens Earned Count".into(), t.of(G::Meta, E::SideChallengeSolved));
    put("Total Win Count".into(), t.all(E::Win));
    put("Total Lose Count".into(), t.all(E::Lose));
    put("Total Surrender Action Count".into(), t.all(E::Surrender));
    put("Total Skip Token Usage Count".into(), t.all(E::Skip));
    put("Total Time Expiry Count".into(), t.all(E::TimeExpired));
    put("Total Over-Time Continue Count".into(), t.all(E::Continue));
    put("Total Gameplay Resume Count".into(), t.all(E::Resume));
    put("Puzzle Games: Total Win Count".into(), t.puzzles(E::Win));
    put("Puzzle Games: Accepted Move Count".into(), t.puzzles(E::MoveAccepted));
    put("Puzzle Games: Winning Move Count".into(), t.winning_moves);
    put("Puzzle Games: Restart Count".into(), t.puzzles(E::Restart));
    put("Puzzle Games: Stage Count".into(), t.puzzles(E::StageStart));

    let s = "Galaxy Shooter Game";
    put(format!("{s}: Maximum Score Achieved"), t.shooter_max_score);
    put(format!("{s}: Total Shots Fired"), t.of(G::Shooter, E::Shot));
    put(
        format!("{s}: Total Lives Lost"),
        t.entity(E::Collision, "enemy_offensive")
            + t.entity(E::Collision, "enemy_defensive")
            + t.entity(E::Collision, "enemy_score")
            + t.entity(E::Collision, "asteroid"),
    );
    put(format!("{s}: Power-Ups Generated"), t.entity(E::Spawn, "power_up"));
    put(format!("{s}: Power-Ups Collected"), t.entity(E::Collect, "power_up"));
    put(format!("{s}: Gold Generated"), t.entity(E::Spawn, "gold"));
    put(format!("{s}: Gold Collected"), t.entity(E::Collect, "gold"));
    put(format!("{s}: Gold Lost"), t.entity(E::Escape, "gold"));
    put(format!("{s}: Gold Exploded"), t.entity(E::Destroy, "gold"));
    let enemies = ["enemy_offensive", "enemy_defensive", "enemy_score"];
    put(format!("{s}: Enemies Generated"), enemies.iter().map(|k| t.entity(E::Spawn, k)).sum());
    put(format!("{s}: Enemies Destroyed by Shooting"), enemies.iter().map(|k| t.entity(E::Destroy, k)).sum());
    put(format!("{s}: Enemy Collisions with Player"), enemies.iter().map(|k| t.entity(E::Collision, k)).sum());
    put(format!("{s}: Asteroids Generated"), t.entity(E::Spawn, "asteroid"));
    put(format!("{s}: Asteroids Destroyed by Shooting"), t.entity(E::Destroy, "asteroid"));
    put(format!("{s}: Asteroid Collisions with Player"), t.entity(E::Collision, "asteroid"));
    put(format!("{s}: Leftward Movement Count"), t.shooter_moves[0]);
    put(format!("{s}: Rightward Movement Count"), t.shooter_moves[1]);
    put(format!("{s}: Total Horizontal Movement Count"), t.shooter_moves[0] + t.shooter_moves[1]);
    put(format!("{s}: Left Boundary Exit Count"), t.shooter_exits[0]);
    put(format!("{s}: Right Boundary Exit Count"), t.shooter_exits[1]);
    put(format!("{s}: Total Boundary Exit Count"), t.shooter_exits[0] + t.shooter_exits[1]);
    put(format!("{s}: Challenges Completed Count"), t.challenges.len() as u64);

    num.insert("Total Gameplay Duration in Minutes".into(), minutes(t.total_ms));
    num.insert("Total Paused Duration in Minutes".into(), minutes(t.paused_ms));
    num.insert("Total Gameplay Duration Including Pauses in Minutes".into(), minutes(t.span_ms));
    for g in GameId::PLAYABLE {
        num.insert(format!("{}: Gameplay Duration in Minutes", game_prefix(g)), minutes(t.ms.get(&g).copied().unwrap_or(0)));
    }

    let mut flags: Vec<(String, bool)> = Vec::new();
    for (name, a, b) in RATIOS {
        let (a, b) = (num[a], num[b]);
        flags.push((zero_flag_name(name), b == 0.0));
        num.insert(name.to_owned(), if b == 0.0 { 0.0 } else { a / b });
    }
    for (name, a, b) in BIASES {
        let (a, b) = (num[a], num[a] + num[b]);
        flags.push((zero_flag_name(name), b == 0.0));
        num.insert(name.to_owned(), if b == 0.0 { 0.0 } else { a / b });
    }

    const CHALLENGE_COLUMNS: [(&str, &str); 6] = [
        ("Life Survival", "life_survival"),
        ("Enemy Elimination", "enemy_elimination"),
        ("Asteroid Destruction", "asteroid_destruction"),
        ("Gold Collection", "gold_collection"),
        ("No-Weapon Usage", "no_weapon"),
        ("Score Achievement", "score_achievement"),
    ];

    let mut values = Vec::with_capacity(catalog().len() + flags.len());
    for var in catalog() {
        let name = var.name.as_str();
        let value = match var.source {
            Source::Identity => match &log.tracking_code {
                Some(c) => FeatureValue::Text(c.clone()),
                None => FeatureValue::Missing,
            },
            Source::Questionnaire => questionnaire_value(demographics, name, var.var_type),
            Source::Gameplay => {
                if name == "Selected Game Difficulty Level" {
                    FeatureValue::Enum(log.difficulty.as_str().into(), u32::from(log.difficulty.ordinal()))
                } else if let Some((_, key)) =
                    CHALLENGE_COLUMNS.iter().find(|(label, _)| name == format!("{s}: {label} Challenge Completed"))
                {
                    FeatureValue::Bool(t.challenges.contains_key(*key))
                } else {
                    match num.get(name) {
                        Some(&v) => FeatureValue::Number(v),
                        None => {
                            return Err(FeatureError::Integrity(format!("no extractor for catalog variable `{name}`")))
                        }
                    }
                }
            }
        };
        values.push((name.to_owned(), value));
    }
    values.extend(flags.into_iter().map(|(n, b)| (n, FeatureValue::Bool(b))));
    Ok(FeatureVector { session_id: log.session_id.clone(), values })
}

fn questionnaire_value(d: Option<&Demographics>, name: &str, ty: VarType) -> FeatureValue {
    let Some(d) = d else { return FeatureValue::Missing };
    let Some(v) = d.numeric(name) else { return FeatureValue::Missing };
    match ty {
        VarType::Bool => FeatureValue::Bool(v != 0.0),
        VarType::Enum => {
            let label = match name {
                "Participant Gender" => if v == 1.0 { "male" } else { "female" }.to_owned(),
                "MBTI Personality Type" => d.mbti.code(),
                "MBTI Extraversion-Introversion" => if d.mbti.extravert { "E" } else { "I" }.to_owned(),
                "MBTI Sensing-Intuition" => if d.mbti.sensing { "S" } else { "N" }.to_owned(),
                "MBTI Thinking-Feeling" => if d.mbti.thinking { "T" } else { "F" }.to_owned(),
                "MBTI Judging-Perceiving" => if d.mbti.judging { "J" } else { "P" }.to_owned(),
                "Primary Gaming Platform" => d.platform.as_str().to_owned(),
                _ => format!("{v}"),
            };
            FeatureValue::Enum(label, v as u32)
        }
        VarType::Number | VarType::Text => FeatureValue::Number(v),
    }
}

/// Per-row class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Suitable,
    Unsuitable,
    Unlabeled,
}

impl Label {
    pub fn from_bool(b: Option<bool>) -> Label {
        match b {
            Some(true) => Label::Suitable,
            Some(false) => Label::Unsuitable,
            None => Label::Unlabeled,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Label::Suitable => Some(true),
            Label::Unsuitable => Some(false),
            Label::Unlabeled => None,
        }
    }

    fn csv(self) -> &'static str {
        match self {
            Label::Suitable => "1",
            Label::Unsuitable => "0",
            Label::Unlabeled => "NA",
        }
    }
}

/// Participant by feature matrix. Missing values are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
    /// `true` for boolean and enum columns.
    pub categorical: Vec<bool>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl Dataset {
    pub fn new(
        ids: Vec<String>,
        feature_names: Vec<String>,
        categorical: Vec<bool>,
        rows: Vec<Vec<f64>>,
        labels: Vec<Label>,
    ) -> Result<Dataset, FeatureError> {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(FeatureError::Input(format!("duplicate feature `{dup}`")));
        }
        if categorical.len() != feature_names.len() {
            return Err(FeatureError::Input("column kind list does not match feature names".into()));
        }
        if ids.len() != rows.len() || labels.len() != rows.len() {
            return Err(FeatureError::Input("ids, rows and labels differ in length".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != feature_names.len()) {
            return Err(FeatureError::Input(format!("row {i} has {} values for {} features", rows[i].len(), feature_names.len())));
        }
        Ok(Dataset { ids, feature_names, categorical, rows, labels })
    }

    /// Numeric dataset from extracted vectors. Text columns are left out.
    pub fn from_vectors(vectors: &[FeatureVector], labels: Vec<Label>) -> Result<Dataset, FeatureError> {
        let Some(first) = vectors.first() else {
            return Err(FeatureError::Input("no feature vectors".into()));
        };
        let keep: Vec<usize> = first
            .values
            .iter()
            .enumerate()
            .filter(|(_, (n, _))| catalog::lookup(n).is_none_or(|v| v.var_type != VarType::Text))
            .map(|(i, _)| i)
            .collect();
        let names: Vec<String> = keep.iter().map(|&i| first.values[i].0.clone()).collect();
        let categorical = keep
            .iter()
            .map(|&i| {
                let n = &first.values[i].0;
                catalog::lookup(n).is_none_or(|v| matches!(v.var_type, VarType::Bool | VarType::Enum))
            })
            .collect();
        let mut rows = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.values.len() != first.values.len() {
                return Err(FeatureError::Input(format!("vector `{}` has a different layout", v.session_id)));
            }
            rows.push(keep.iter().map(|&i| v.values[i].1.numeric()).collect());
        }
        Dataset::new(vectors.iter().map(|v| v.session_id.clone()).collect(), names, categorical, rows, labels)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Keeps the listed columns, in the given order.
    pub fn select(&self, cols: &[usize]) -> Dataset {
        Dataset {
            ids: self.ids.clone(),
            feature_names: cols.iter().map(|&j| self.feature_names[j].clone()).collect(),
            categorical: cols.iter().map(|&j| self.categorical[j]).collect(),
            rows: self.rows.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn select_names(&self, names: &[String]) -> Result<Dataset, FeatureError> {
        let cols = names
            .iter()
            .map(|n| self.index_of(n).ok_or_else(|| FeatureError::Input(format!("unknown feature `{n}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.select(&cols))
    }

    pub fn labeled_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.labels[i] != Label::Unlabeled).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = vec!["session_id"];
        header.extend(self.feature_names.iter().map(String::as_str));
        header.push("suitable");
        w.write_record(&header).expect("in-memory write");
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec = vec![self.ids[i].clone()];
            rec.extend(row.iter().map(|v| if v.is_nan() { "NA".to_owned() } else { format!("{v}") }));
            rec.push(self.labels[i].csv().to_owned());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), FeatureError> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Dataset, FeatureError> {
        let err = |m: String| FeatureError::Input(format!("{}: {m}", path.display()));
        let mut r = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
        let headers = r.headers().map_err(|e| err(e.to_string()))?.clone();
        if headers.len() < 2 || &headers[0] != "session_id" || &headers[headers.len() - 1] != "suitable" {
            return Err(err("expected session_id first and suitable last".into()));
        }
        let names: Vec<String> = headers.iter().skip(1).take(headers.len() - 2).map(str::to_owned).collect();
        let categorical = names
            .iter()
            .map(|n| {
                catalog::lookup(n).map_or(n.ends_with("[0/0]"), |v| matches!(v.var_type, VarType::Bool | VarType::Enum))
            })
            .collect();
        let (mut ids, mut rows, mut labels) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| err(e.to_string()))?;
            ids.push(rec[0].to_owned());
            let mut row = Vec::with_capacity(names.len());
            for j in 1..rec.len() - 1 {
                let cell = &rec[j];
                row.push(if cell == "NA" || cell.is_empty() {
                    f64::NAN
                } else {
                    cell.parse().map_err(|_| err(format!("row {}: bad number `{cell}`", line + 2)))?
                });
            }
            rows.push(row);
            labels.push(match &rec[rec.len() - 1] {
                "1" => Label::Suitable,
                "0" => Label::Unsuitable,
                "NA" | "" => Label::Unlabeled,
                other => return Err(err(format!("row {}: bad label `{other}`", line + 2))),
            });
        }
        Dataset::new(ids, names, categorical, rows, labels)
    }
}

/// Extracts every session, joining demographics by session id.
pub fn extract_all(
    logs: &[SessionLog],
    demographics: &[Demographics],
    labels: &HashMap<String, Option<bool>>,
) -> Result<Dataset, FeatureError> {
    use rayon::prelude::*;
    let by_id: HashMap<&str, &Demographics> = demographics.iter().map(|d| (d.session_id.as_str(), d)).collect();
    let vectors = logs
        .par_iter()
        .map(|log| extract_features(log, by_id.get(log.session_id.as_str()).copied()))
        .collect::<Result<Vec<_>, _>>()?;
    let lab = logs.iter().map(|l| Label::from_bool(labels.get(&l.session_id).copied().flatten())).collect();
    Dataset::from_vectors(&vectors, lab)
}
