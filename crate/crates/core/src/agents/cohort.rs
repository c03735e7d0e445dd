//! Synthetic cohorts: class-conditional trait profiles, questionnaire
//! answers consistent with them, and the resulting session logs.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simulate_participant, AgentError, BehaviorModel, PreparedPack, TraitProfile};
use crate::rng::{self, Rng};
use crate::telemetry::export::write_sessions;
use crate::telemetry::session::SessionLog;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub n_participants: usize,
    pub suitable_fraction: f64,
    pub suitable_means: TraitProfile,
    pub unsuitable_means: TraitProfile,
    pub profile_noise_sd: f64,
    pub labeled_count: usize,
    pub seed: u64,
    /// Chance that a self-assessment boolean agrees with its trait.
    pub self_report_fidelity: f64,
    /// Chance that the MBTI T/F pole agrees with `thinking >= 0.5`.
    pub mbti_t_fidelity: f64,
    pub behavior: BehaviorModel,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_participants: 132,
            suitable_fraction: 0.5,
            suitable_means: TraitProfile {
                thinking: 0.75,
                information_seeking: 0.7,
                help_seeking: 0.65,
                time_management: 0.7,
                persistence: 0.75,
                adaptability: 0.65,
            },
            unsuitable_means: TraitProfile {
                thinking: 0.3,
                information_seeking: 0.35,
                help_seeking: 0.35,
                time_management: 0.3,
                persistence: 0.3,
                adaptability: 0.4,
            },
            profile_noise_sd: 0.12,
            labeled_count: 39,
            seed: 20240501,
            self_report_fidelity: 0.95,
            mbti_t_fidelity: 0.9,
            behavior: BehaviorModel::default(),
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<(), AgentError> {
        if self.n_participants == 0 {
            return Err(AgentError::Input("cohort needs at least one participant".into()));
        }
        if !(self.suitable_fraction > 0.0 && self.suitable_fraction < 1.0) {
            return Err(AgentError::Input(format!("suitable_fraction {} is outside (0,1)", self.suitable_fraction)));
        }
        if self.labeled_count > self.n_participants {
            return Err(AgentError::Input(format!(
                "labeled_count {} exceeds n_participants {}",
                self.labeled_count, self.n_participants
            )));
        }
        if !(self.profile_noise_sd >= 0.0 && self.profile_noise_sd.is_finite()) {
            return Err(AgentError::Input("profile_noise_sd must be finite and non-negative".into()));
        }
        for p in [self.self_report_fidelity, self.mbti_t_fidelity] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AgentError::Input(format!("fidelity {p} is outside [0,1]")));
            }
        }
        self.suitable_means.validate()?;
        self.unsuitable_means.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Platform {
    Mobile,
    Pc,
    Console,
}

impl Platform {
    pub fn as_str(self) -> &'static str {
        match self {
            Platform::Mobile => "mobile",
            Platform::Pc => "pc",
            Platform::Console => "console",
        }
    }
}

/// A four-letter MBTI type such as `INTJ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mbti {
    pub extravert: bool,
    pub sensing: bool,
    pub thinking: bool,
    pub judging: bool,
}

impl Mbti {
    pub fn code(self) -> String {
        [
            if self.extravert { 'E' } else { 'I' },
            if self.sensing { 'S' } else { 'N' },
            if self.thinking { 'T' } else { 'F' },
            if self.judging { 'J' } else { 'P' },
        ]
        .iter()
        .collect()
    }

    pub fn parse(s: &str) -> Option<Mbti> {
        let c: Vec<char> = s.trim().to_ascii_uppercase().chars().collect();
        if c.len() != 4 {
            return None;
        }
        let pick = |ch: char, yes: char, no: char| match ch {
            x if x == yes => Some(true),
            x if x == no => Some(false),
            _ => None,
        };
        Some(Mbti {
            extravert: pick(c[0], 'E', 'I')?,
            sensing: pick(c[1], 'S', 'N')?,
            thinking: pick(c[2], 'T', 'F')?,
            judging: pick(c[3], 'J', 'P')?,
        })
    }

    /// Position in the conventional 16-type table (ISTJ = 0 .. ENTJ = 15).
    pub fn index(self) -> usize {
        const ORDER: [&str; 16] = [
            "ISTJ", "ISFJ", "INFJ", "INTJ", "ISTP", "ISFP", "INFP", "INTP", "ESTP", "ESFP", "ENFP", "ENTP", "ESTJ",
            "ESFJ", "ENFJ", "ENTJ",
        ];
        let code = self.code();
        ORDER.iter().position(|c| *c == code).expect("all 16 codes listed")
    }
}

/// Questionnaire answers of one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demographics {
    pub session_id: String,
    pub age: u32,
    pub gender: Gender,
    pub computer_engineering: bool,
    pub mbti: Mbti,
    pub confirmed_interest: Option<bool>,
    pub predicted_suitability: Option<bool>,
    pub help_seeking: bool,
    pub online_search: bool,
    pub time_management: bool,
    pub competitive: bool,
    pub flexibility: bool,
    pub platform: Platform,
    pub weekly_hours: f64,
}

/// Demographics table columns after the join key.
pub const DEMOGRAPHIC_COLUMNS: [&str; 22] = [
    "Participant Age",
    "Participant Gender",
    "Gender Flag: Male",
    "Gender Flag: Female",
    "Computer Engineering Background",
    "MBTI Personality Type",
    "MBTI Extraversion-Introversion",
    "MBTI Sensing-Intuition",
    "MBTI Thinking-Feeling",
    "MBTI Judging-Perceiving",
    "MBTI SJ Functional Group",
    "MBTI SP Functional Group",
    "MBTI NF Functional Group",
    "MBTI NT Functional Group",
    "Confirmed Programming Interest",
    "Predicted Programming Suitability",
    "Help-Seeking Behavior",
    "Problem-Solving via Online Search Skill",
    "Time Management Ability",
    "Competitive Motivation",
    "Behavioral Flexibility and Adaptability",
    "Primary Gaming Platform",
];

pub const WEEKLY_HOURS_COLUMN: &str = "Average Weekly Gameplay Duration";

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_owned()
}

fn opt_flag(b: Option<bool>) -> String {
    b.map(flag).unwrap_or_default()
}

impl Demographics {
    /// Numeric encoding used by the feature matrix: booleans and MBTI poles
    /// as 0/1 (E, S, T, J and male are 1), enums as ordinals. `None` is a
    /// missing answer or an unknown column.
    pub fn numeric(&self, column: &str) -> Option<f64> {
        let b = |v: bool| Some(if v { 1.0 } else { 0.0 });
        let m = self.mbti;
        match column {
            "Participant Age" => Some(f64::from(self.age)),
            "Participant Gender" | "Gender Flag: Male" => b(self.gender == Gender::Male),
            "Gender Flag: Female" => b(self.gender == Gender::Female),
            "Computer Engineering Background" => b(self.computer_engineering),
            "MBTI Personality Type" => Some(m.index() as f64),
            "MBTI Extraversion-Introversion" => b(m.extravert),
            "MBTI Sensing-Intuition" => b(m.sensing),
            "MBTI Thinking-Feeling" => b(m.thinking),
            "MBTI Judging-Perceiving" => b(m.judging),
            "MBTI SJ Functional Group" => b(m.sensing && m.judging),
            "MBTI SP Functional Group" => b(m.sensing && !m.judging),
            "MBTI NF Functional Group" => b(!m.sensing && !m.thinking),
            "MBTI NT Functional Group" => b(!m.sensing && m.thinking),
            "Confirmed Programming Interest" => self.confirmed_interest.and_then(b),
            "Predicted Programming Suitability" => self.predicted_suitability.and_then(b),
            "Help-Seeking Behavior" => b(self.help_seeking),
            "Problem-Solving via Online Search Skill" => b(self.online_search),
            "Time Management Ability" => b(self.time_management),
            "Competitive Motivation" => b(self.competitive),
            "Behavioral Flexibility and Adaptability" => b(self.flexibility),
            "Primary Gaming Platform" => Some(match self.platform {
                Platform::Mobile => 0.0,
                Platform::Pc => 1.0,
                Platform::Console => 2.0,
            }),
            WEEKLY_HOURS_COLUMN => Some(self.weekly_hours),
            _ => None,
        }
    }

    fn text_row(&self) -> Vec<String> {
        let m = self.mbti;
        let pole = |v: bool, a: &str, b: &str| if v { a } else { b }.to_owned();
        let mut row = vec![self.session_id.clone(), self.age.to_string()];
        row.push(match self.gender {
            Gender::Male => "male".into(),
            Gender::Female => "female".into(),
        });
        row.push(flag(self.gender == Gender::Male));
        row.push(flag(self.gender == Gender::Female));
        row.push(flag(self.computer_engineering));
        row.push(m.code());
        row.push(pole(m.extravert, "E", "I"));
        row.push(pole(m.sensing, "S", "N"));
        row.push(pole(m.thinking, "T", "F"));
        row.push(pole(m.judging, "J", "P"));
        row.push(flag(m.sensing && m.judging));
        row.push(flag(m.sensing && !m.judging));
        row.push(flag(!m.sensing && !m.thinking));
        row.push(flag(!m.sensing && m.thinking));
        row.push(opt_flag(self.confirmed_interest));
        row.push(opt_flag(self.predicted_suitability));
        for v in [self.help_seeking, self.online_search, self.time_management, self.competitive, self.flexibility] {
            row.push(flag(v));
        }
        row.push(self.platform.as_str().into());
        row.push(format!("{}", self.weekly_hours));
        row
    }
}

pub fn write_demographics(rows: &[Demographics], path: &Path) -> Result<(), AgentError> {
    let io = |e: csv::Error| AgentError::Input(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["session_id"];
    header.extend(DEMOGRAPHIC_COLUMNS);
    header.push(WEEKLY_HOURS_COLUMN);
    w.write_record(&header).map_err(io)?;
    for d in rows {
        w.write_record(d.text_row()).map_err(io)?;
    }
    w.flush().map_err(|e| AgentError::Input(format!("{}: {e}", path.display())))
}

pub fn read_demographics(path: &Path) -> Result<Vec<Demographics>, AgentError> {
    let err = |msg: String| AgentError::Input(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let headers = r.headers().map_err(|e| err(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| err(format!("missing column `{name}`")));
    let c_id = col("session_id")?;
    let c_age = col("Participant Age")?;
    let c_gender = col("Participant Gender")?;
    let c_ce = col("Computer Engineering Background")?;
    let c_mbti = col("MBTI Personality Type")?;
    let c_conf = col("Confirmed Programming Interest")?;
    let c_pred = col("Predicted Programming Suitability")?;
    let c_bools = [
        col("Help-Seeking Behavior")?,
        col("Problem-Solving via Online Search Skill")?,
        col("Time Management Ability")?,
        col("Competitive Motivation")?,
        col("Behavioral Flexibility and Adaptability")?,
    ];
    let c_plat = col("Primary Gaming Platform")?;
    let c_hours = col(WEEKLY_HOURS_COLUMN)?;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let at = |c: usize| rec.get(c).unwrap_or("").trim();
        let bad = |c: usize| err(format!("row {}: bad value `{}` in `{}`", line + 2, at(c), &headers[c]));
        let boolean = |c: usize| -> Result<Option<bool>, AgentError> {
            match at(c) {
                "" | "NA" => Ok(None),
                "1" | "true" => Ok(Some(true)),
                "0" | "false" => Ok(Some(false)),
                _ => Err(bad(c)),
            }
        };
        let required = |c: usize| boolean(c)?.ok_or_else(|| bad(c));
        out.push(Demographics {
            session_id: at(c_id).to_owned(),
            age: at(c_age).parse().map_err(|_| bad(c_age))?,
            gender: match at(c_gender) {
                "male" => Gender::Male,
                "female" => Gender::Female,
                _ => return Err(bad(c_gender)),
            },
            computer_engineering: required(c_ce)?,
            mbti: Mbti::parse(at(c_mbti)).ok_or_else(|| bad(c_mbti))?,
            confirmed_interest: boolean(c_conf)?,
            predicted_suitability: boolean(c_pred)?,
            help_seeking: required(c_bools[0])?,
            online_search: required(c_bools[1])?,
            time_management: required(c_bools[2])?,
            competitive: required(c_bools[3])?,
            flexibility: required(c_bools[4])?,
            platform: match at(c_plat) {
                "mobile" => Platform::Mobile,
                "pc" => Platform::Pc,
                "console" => Platform::Console,
                _ => return Err(bad(c_plat)),
            },
            weekly_hours: at(c_hours).parse().map_err(|_| bad(c_hours))?,
        });
    }
    Ok(out)
}

/// Ground truth for one participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub session_id: String,
    pub suitable: bool,
    pub labeled: bool,
}

pub struct Cohort {
    pub spec: CohortSpec,
    pub profiles: Vec<TraitProfile>,
    pub logs: Vec<SessionLog>,
    pub demographics: Vec<Demographics>,
    pub labels: Vec<LabelRecord>,
}

impl Cohort {
    /// Writes `sessions/*.ndjson`, `demographics.csv`, `labels.csv` and
    /// `profiles.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), AgentError> {
        let io = |e: std::io::Error| AgentError::Input(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        write_sessions(&self.logs, &dir.join("sessions")).map_err(|e| AgentError::Input(e.to_string()))?;
        write_demographics(&self.demographics, &dir.join("demographics.csv"))?;
        let csv_err = |e: csv::Error| AgentError::Input(e.to_string());
        let mut w = csv::Writer::from_path(dir.join("labels.csv")).map_err(csv_err)?;
        for l in &self.labels {
            w.serialize(l).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
        let mut w = csv::Writer::from_path(dir.join("profiles.csv")).map_err(csv_err)?;
        let mut header = vec!["session_id"];
        header.extend(TraitProfile::NAMES);
        w.write_record(&header).map_err(csv_err)?;
        for (l, p) in self.labels.iter().zip(&self.profiles) {
            let mut row = vec![l.session_id.clone()];
            row.extend(p.to_array().iter().map(|v| format!("{v}")));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelRecord>, AgentError> {
    let err = |e: csv::Error| AgentError::Input(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    r.deserialize().map(|rec| rec.map_err(err)).collect()
}

fn truncated_normal(rng: &mut Rng, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return mean;
    }
    let n = Normal::new(mean, sd).expect("sd validated");
    for _ in 0..1000 {
        let v = n.sample(rng);
        if (0.0..=1.0).contains(&v) {
            return v;
        }
    }
    mean.clamp(0.0, 1.0)
}

fn sample_profile(rng: &mut Rng, means: &TraitProfile, sd: f64) -> TraitProfile {
    let m = means.to_array();
    TraitProfile::from_array(std::array::from_fn(|i| truncated_normal(rng, m[i], sd)))
}

fn answer(rng: &mut Rng, truth: bool, fidelity: f64) -> bool {
    if rng.gen::<f64>() < fidelity {
        truth
    } else {
        !truth
    }
}

fn sample_demographics(
    rng: &mut Rng,
    spec: &CohortSpec,
    session_id: String,
    p: &TraitProfile,
    suitable: bool,
    labeled: bool,
) -> Demographics {
    let f = spec.self_report_fidelity;
    let mbti = Mbti {
        extravert: answer(rng, p.help_seeking >= 0.5, 0.6),
        sensing: answer(rng, p.adaptability < 0.5, 0.7),
        thinking: answer(rng, p.thinking >= 0.5, spec.mbti_t_fidelity),
        judging: answer(rng, p.time_management >= 0.5, 0.85),
    };
    let platform = match rng.gen::<f64>() {
        u if u < 0.55 => Platform::Mobile,
        u if u < 0.9 => Platform::Pc,
        _ => Platform::Console,
    };
    Demographics {
        session_id,
        age: rng.gen_range(19..=26),
        gender: if rng.gen::<f64>() < 0.6 { Gender::Male } else { Gender::Female },
        computer_engineering: rng.gen::<f64>() < 0.3 + 0.4 * p.thinking,
        mbti,
        confirmed_interest: labeled.then_some(suitable),
        predicted_suitability: None,
        help_seeking: answer(rng, p.help_seeking >= 0.5, f),
        online_search: answer(rng, p.information_seeking >= 0.5, f),
        time_management: answer(rng, p.time_management >= 0.5, f),
        competitive: answer(rng, p.persistence >= 0.5, f),
        flexibility: answer(rng, p.adaptability >= 0.5, f),
        platform,
        weekly_hours: (rng.gen_range(1.0..14.0f64) * 10.0).round() / 10.0,
    }
}

/// Splits `n` into the suitable set, then marks a labeled subset stratified
/// by class.
fn assign_classes(spec: &CohortSpec) -> (Vec<bool>, Vec<bool>) {
    let n = spec.n_participants;
    let mut rng = rng::seeded(rng::derive_named(spec.seed, "classes"));
    let n_suit = ((n as f64) * spec.suitable_fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut suitable = vec![false; n];
    for &i in &order[..n_suit] {
        suitable[i] = true;
    }
    let lab_suit = ((spec.labeled_count as f64) * n_suit as f64 / n as f64).round() as usize;
    let lab_suit = lab_suit.min(n_suit).max(spec.labeled_count.saturating_sub(n - n_suit));
    let lab_unsuit = spec.labeled_count - lab_suit;
    let mut labeled = vec![false; n];
    for (class, take) in [(true, lab_suit), (false, lab_unsuit)] {
        let mut members: Vec<usize> = (0..n).filter(|&i| suitable[i] == class).collect();
        members.shuffle(&mut rng);
        for &i in &members[..take] {
            labeled[i] = true;
        }
    }
    (suitable, labeled)
}

pub fn generate_cohort(spec: &CohortSpec, prepared: &PreparedPack) -> Result<Cohort, AgentError> {
    spec.validate()?;
    let (suitable, labeled) = assign_classes(spec);
    let rows: Vec<_> = (0..spec.n_participants)
        .into_par_iter()
        .map(|i| {
            let pseed = rng::derive(spec.seed, i as u64);
            let mut trng = rng::seeded(rng::derive_named(pseed, "traits"));
            let means = if suitable[i] { &spec.suitable_means } else { &spec.unsuitable_means };
            let profile = sample_profile(&mut trng, means, spec.profile_noise_sd);
            let id = format!("p{i:04}");
            let mut drng = rng::seeded(rng::derive_named(pseed, "demographics"));
            let demo = sample_demographics(&mut drng, spec, id.clone(), &profile, suitable[i], labeled[i]);
            let log = simulate_participant(&profile, prepared, &spec.behavior, rng::derive_named(pseed, "play"), &id)?;
            Ok((profile, log, demo))
        })
        .collect::<Result<_, AgentError>>()?;
    let mut cohort = Cohort {
        spec: spec.clone(),
        profiles: Vec::with_capacity(rows.len()),
        logs: Vec::with_capacity(rows.len()),
        demographics: Vec::with_capacity(rows.len()),
        labels: Vec::with_capacity(rows.len()),
    };
    for (i, (p, log, demo)) in rows.into_iter().enumerate() {
        cohort.labels.push(LabelRecord { session_id: log.session_id.clone(), suitable: suitable[i], labeled: labeled[i] });
        cohort.profiles.push(p);
        cohort.logs.push(log);
        cohort.demographics.push(demo);
    }
    Ok(cohort)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::LevelPack;

    fn small(n: usize, labeled: usize) -> CohortSpec {
        CohortSpec { n_participants: n, labeled_count: labeled, ..CohortSpec::default() }
    }

    #[test]
    fn ten_at_half_split_five_five() {
        let (s, l) = assign_classes(&small(10, 4));
        assert_eq!(s.iter().filter(|&&x| x).count(), 5);
        assert_eq!(l.iter().filter(|&&x| x).count(), 4);
        assert_eq!(s.iter().zip(&l).filter(|(&s, &l)| s && l).count(), 2);
    }

    #[test]
    fn default_cohort_is_132_with_39_labeled() {
        let (s, l) = assign_classes(&CohortSpec::default());
        assert_eq!(s.len(), 132);
        assert_eq!(l.iter().filter(|&&x| x).count(), 39);
    }

    #[test]
    fn degenerate_specs_are_rejected() {
        assert!(small(0, 0).validate().is_err());
        assert!(small(5, 6).validate().is_err());
        assert!(CohortSpec { suitable_fraction: 1.0, ..small(5, 1) }.validate().is_err());
    }

    #[test]
    fn same_seed_same_cohort_and_csv_round_trip() {
        let prepared = PreparedPack::new(LevelPack::default_pack()).unwrap();
        let spec = small(6, 2);
        let a = generate_cohort(&spec, &prepared).unwrap();
        let b = generate_cohort(&spec, &prepared).unwrap();
        assert_eq!(a.logs, b.logs);
        assert_eq!(a.labels, b.labels);
        let dir = tempfile::tempdir().unwrap();
        a.write(dir.path()).unwrap();
        assert_eq!(read_demographics(&dir.path().join("demographics.csv")).unwrap(), a.demographics);
        assert_eq!(read_labels(&dir.path().join("labels.csv")).unwrap(), a.labels);
    }

    #[test]
    fn mbti_codes_round_trip() {
        for i in 0..16u8 {
            let m = Mbti { extravert: i & 1 != 0, sensing: i & 2 != 0, thinking: i & 4 != 0, judging: i & 8 != 0 };
            assert_eq!(Mbti::parse(&m.code()), Some(m));
        }
        assert_eq!(Mbti::parse("XXXX"), None);
    }
}
