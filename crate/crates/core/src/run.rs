//! Command implementations shared by the `assess` binary and the test
//! suites. Every command writes its artifacts plus a `manifest.json` into
//! one output directory.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::cohort::{generate_cohort, read_demographics, read_labels, CohortSpec};
use crate::agents::{AgentError, PreparedPack};
use crate::features::catalog::rank;
use crate::features::preprocess::{behavioral_only, preprocess as run_preprocess};
use crate::features::{extract_all, Dataset, FeatureError, Label};
use crate::levels::{LevelError, LevelPack};
use crate::ml::pipeline::{
    best_by_accuracy, label_correlations, phase1 as run_phase1, phase2 as run_phase2, CellResult, Phase1Config, Phase1Outcome,
    Phase2Config, Phase2Outcome,
};
use crate::ml::report::{phase1_table, reduction_table, selection_table, Table};
use crate::ml::MlError;
use crate::rng;
use crate::solvers::validate::{validate_level_pack, ValidationReport};
use crate::solvers::DEFAULT_STATE_CAP;
use crate::telemetry::export::import_sessions;
use crate::telemetry::store::StoreError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Levels(#[from] LevelError),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Agents(#[from] AgentError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Ml(#[from] MlError),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Io(_) => "io",
            RunError::Levels(_) => "levels",
            RunError::Validation(_) => "validation",
            RunError::Agents(_) => "agents",
            RunError::Store(_) => "store",
            RunError::Features(_) => "features",
            RunError::Ml(MlError::Leakage(_)) => "leakage",
            RunError::Ml(_) => "ml",
        }
    }

    /// One line: `error kind=<kind> message=<json string>`.
    pub fn line(&self) -> String {
        format!("error kind={} message={}", self.kind(), serde_json::to_string(&self.to_string()).expect("string"))
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |e| RunError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Global seed. Overrides `cohort.seed`; every stochastic step derives
    /// its stream from it.
    pub seed: u64,
    /// Level-pack directory; the shipped pack when absent.
    pub levels: Option<PathBuf>,
    /// Session store directory for `serve`.
    pub store: Option<PathBuf>,
    pub bind: String,
    pub out: PathBuf,
    /// Search cap per level for `validate-levels`.
    pub state_cap: usize,
    pub cohort: CohortSpec,
    pub phase1: Phase1Config,
    pub phase2: Phase2Config,
    /// `correlations` keeps features with `|r|` above this.
    pub correlation_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: CohortSpec::default().seed,
            levels: None,
            store: None,
            bind: "127.0.0.1:8080".into(),
            out: PathBuf::from("out"),
            state_cap: DEFAULT_STATE_CAP,
            cohort: CohortSpec::default(),
            phase1: Phase1Config::default(),
            phase2: Phase2Config::default(),
            correlation_threshold: 0.25,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, RunError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| RunError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn level_pack(&self) -> Result<LevelPack, RunError> {
        Ok(LevelPack::load_or_default(self.levels.as_deref())?)
    }

    fn cohort_spec(&self) -> CohortSpec {
        CohortSpec { seed: self.seed, ..self.cohort.clone() }
    }

    fn stage_seed(&self, stage: &str) -> u64 {
        rng::derive_named(self.seed, stage)
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    inputs: Vec<String>,
    outputs: Vec<String>,
    config: &'a RunConfig,
}

/// Output directory with a record of what was written into it.
struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(root: &Path) -> Result<OutDir, RunError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(OutDir { root: root.to_path_buf(), written: Vec::new() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<PathBuf, RunError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, text).map_err(io_err(&path))?;
        self.note(name);
        Ok(path)
    }

    fn note(&mut self, name: &str) {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_owned());
        }
    }

    fn table(&mut self, stem: &str, table: &Table) -> Result<(), RunError> {
        self.write(&format!("{stem}.csv"), &table.to_csv())?;
        self.write(&format!("{stem}.txt"), &table.to_text())?;
        Ok(())
    }

    fn manifest(mut self, command: &str, cfg: &RunConfig, inputs: &[&Path]) -> Result<(), RunError> {
        self.written.sort();
        let m = Manifest {
            command,
            version: VERSION,
            seed: cfg.seed,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: self.written.clone(),
            config: cfg,
        };
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        let path = self.path("manifest.json");
        fs::write(&path, text + "\n").map_err(io_err(&path))
    }
}

/// Solves every puzzle level; fails on the first level that is unsolvable
/// or whose move limit is below its optimum.
pub fn validate_levels(cfg: &RunConfig, out: &Path) -> Result<ValidationReport, RunError> {
    let pack = cfg.level_pack()?;
    let report = validate_level_pack(&pack, cfg.state_cap);
    let mut dir = OutDir::create(out)?;
    dir.write("levels_report.json", &(report.to_json() + "\n"))?;
    dir.write("levels_report.txt", &report.to_text())?;
    let inputs: Vec<&Path> = cfg.levels.iter().map(PathBuf::as_path).collect();
    dir.manifest("validate-levels", cfg, &inputs)?;
    report.check().map_err(|e| RunError::Validation(e.to_string()))?;
    Ok(report)
}

/// Simulates the cohort into `out`: `sessions/`, `demographics.csv`,
/// `labels.csv`, `profiles.csv`.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<crate::agents::cohort::Cohort, RunError> {
    let prepared = PreparedPack::new(cfg.level_pack()?)?;
    let cohort = generate_cohort(&cfg.cohort_spec(), &prepared)?;
    let mut dir = OutDir::create(out)?;
    cohort.write(out)?;
    for name in ["demographics.csv", "labels.csv", "profiles.csv"] {
        dir.note(name);
    }
    for log in &cohort.logs {
        dir.note(&format!("sessions/{}.ndjson", log.session_id));
    }
    dir.manifest("simulate", cfg, &[])?;
    Ok(cohort)
}

/// Reads a cohort directory as written by [`simulate`] (or real exports
/// laid out the same way) and builds the feature dataset. Rows carry the
/// verified labels only.
pub fn load_dataset(cohort_dir: &Path) -> Result<Dataset, RunError> {
    let logs = import_sessions(&cohort_dir.join("sessions"))?;
    let demographics = read_demographics(&cohort_dir.join("demographics.csv"))?;
    let labels: HashMap<String, Option<bool>> = read_labels(&cohort_dir.join("labels.csv"))?
        .into_iter()
        .map(|l| (l.session_id, l.labeled.then_some(l.suitable)))
        .collect();
    Ok(extract_all(&logs, &demographics, &labels)?)
}

pub fn extract(cfg: &RunConfig, cohort_dir: &Path, out: &Path) -> Result<Dataset, RunError> {
    let ds = load_dataset(cohort_dir)?;
    let mut dir = OutDir::create(out)?;
    dir.write("features.csv", &ds.to_csv())?;
    dir.manifest("extract", cfg, &[cohort_dir])?;
    Ok(ds)
}

pub fn read_dataset(path: &Path) -> Result<Dataset, RunError> {
    Ok(Dataset::read_csv(path)?)
}

/// Behaviour-only columns through the coverage, variance and correlation
/// filters.
pub fn preprocess(cfg: &RunConfig, features: &Path, out: &Path) -> Result<Dataset, RunError> {
    let ds = read_dataset(features)?;
    let (clean, report) = run_preprocess(&behavioral_only(&ds), &cfg.phase2.preprocess)?;
    let mut dir = OutDir::create(out)?;
    dir.write("preprocessed.csv", &clean.to_csv())?;
    dir.write("preprocess_report.json", &(serde_json::to_string_pretty(&report).expect("report") + "\n"))?;
    dir.manifest("preprocess", cfg, &[features])?;
    Ok(clean)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletedLabel {
    pub session_id: String,
    pub suitable: bool,
    pub inferred: bool,
}

fn completed_csv(rows: &[CompletedLabel]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn read_completed(path: &Path) -> Result<Vec<CompletedLabel>, RunError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|rec| rec.map_err(|e| RunError::Io(format!("{}: {e}", path.display()))))
        .collect()
}

/// Replaces the dataset labels with completed ones, joined on session id.
pub fn apply_completed(ds: &Dataset, completed: &[CompletedLabel]) -> Result<Dataset, RunError> {
    let by_id: HashMap<&str, bool> = completed.iter().map(|c| (c.session_id.as_str(), c.suitable)).collect();
    let mut out = ds.clone();
    for (i, id) in ds.ids.iter().enumerate() {
        let label = by_id.get(id.as_str()).ok_or_else(|| RunError::Config(format!("no completed label for `{id}`")))?;
        out.labels[i] = Label::from_bool(Some(*label));
    }
    Ok(out)
}

fn results_json(results: &[CellResult]) -> String {
    serde_json::to_string_pretty(results).expect("results serialize") + "\n"
}

pub fn phase1(cfg: &RunConfig, features: &Path, out: &Path) -> Result<(Phase1Outcome, Vec<CompletedLabel>), RunError> {
    let ds = read_dataset(features)?;
    let (outcome, completed) = phase1_on(cfg, &ds)?;
    let mut dir = OutDir::create(out)?;
    write_phase1(&mut dir, &outcome, &completed)?;
    dir.manifest("phase1", cfg, &[features])?;
    Ok((outcome, completed))
}

fn phase1_on(cfg: &RunConfig, ds: &Dataset) -> Result<(Phase1Outcome, Vec<CompletedLabel>), RunError> {
    let outcome = run_phase1(ds, &cfg.phase1, cfg.stage_seed("phase1"))?;
    let completed = ds
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| CompletedLabel { session_id: id.clone(), suitable: outcome.completed[i], inferred: outcome.inferred[i] })
        .collect();
    Ok((outcome, completed))
}

fn write_phase1(dir: &mut OutDir, outcome: &Phase1Outcome, completed: &[CompletedLabel]) -> Result<(), RunError> {
    dir.table("phase1", &phase1_table(&outcome.results))?;
    dir.write("phase1_results.json", &results_json(&outcome.results))?;
    dir.write("completed_labels.csv", &completed_csv(completed))?;
    Ok(())
}

pub fn phase2(cfg: &RunConfig, features: &Path, completed: &Path, out: &Path) -> Result<Phase2Outcome, RunError> {
    let ds = apply_completed(&read_dataset(features)?, &read_completed(completed)?)?;
    let outcome = run_phase2(&ds, &cfg.phase2, cfg.stage_seed("phase2"))?;
    let mut dir = OutDir::create(out)?;
    write_phase2(&mut dir, &outcome)?;
    dir.manifest("phase2", cfg, &[features, completed])?;
    Ok(outcome)
}

fn write_phase2(dir: &mut OutDir, outcome: &Phase2Outcome) -> Result<(), RunError> {
    dir.table("phase2_selection", &selection_table(&outcome.results))?;
    dir.table("phase2_reduction", &reduction_table(&outcome.results))?;
    dir.write("phase2_results.json", &results_json(&outcome.results))?;
    dir.write("preprocess_report.json", &(serde_json::to_string_pretty(&outcome.preprocess).expect("report") + "\n"))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub feature: String,
    pub r: f64,
}

/// Behavioural features whose correlation with the label exceeds the
/// threshold in absolute value, strongest first.
pub fn correlations_of(ds: &Dataset, threshold: f64) -> Vec<Correlation> {
    let mut kept: Vec<Correlation> = label_correlations(&behavioral_only(ds))
        .into_iter()
        .filter(|(_, r)| r.abs() > threshold)
        .map(|(feature, r)| Correlation { feature, r })
        .collect();
    kept.sort_by(|a, b| b.r.abs().total_cmp(&a.r.abs()).then(rank(&a.feature).cmp(&rank(&b.feature))));
    kept
}

fn correlation_table(rows: &[Correlation]) -> Table {
    Table {
        headers: vec!["Feature".into(), "Pearson r".into()],
        rows: rows.iter().map(|c| vec![c.feature.clone(), format!("{:+.3}", c.r)]).collect(),
    }
}

pub fn correlations(cfg: &RunConfig, features: &Path, completed: Option<&Path>, out: &Path) -> Result<Vec<Correlation>, RunError> {
    let mut ds = read_dataset(features)?;
    let mut inputs = vec![features];
    if let Some(c) = completed {
        ds = apply_completed(&ds, &read_completed(c)?)?;
        inputs.push(c);
    }
    let rows = correlations_of(&ds, cfg.correlation_threshold);
    let mut dir = OutDir::create(out)?;
    dir.table("correlations", &correlation_table(&rows))?;
    dir.manifest("correlations", cfg, &inputs)?;
    Ok(rows)
}

fn read_results(path: &Path) -> Result<Vec<CellResult>, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

/// Re-renders tables from saved phase results.
pub fn report(cfg: &RunConfig, phase1_results: Option<&Path>, phase2_results: Option<&Path>, out: &Path) -> Result<(), RunError> {
    if phase1_results.is_none() && phase2_results.is_none() {
        return Err(RunError::Config("report needs phase 1 or phase 2 results".into()));
    }
    let mut dir = OutDir::create(out)?;
    let mut inputs = Vec::new();
    if let Some(p) = phase1_results {
        dir.table("phase1", &phase1_table(&read_results(p)?))?;
        inputs.push(p);
    }
    if let Some(p) = phase2_results {
        let results = read_results(p)?;
        dir.table("phase2_selection", &selection_table(&results))?;
        dir.table("phase2_reduction", &reduction_table(&results))?;
        inputs.push(p);
    }
    dir.manifest("report", cfg, &inputs)
}

/// Runs the telemetry server until interrupted. Sessions are kept in the
/// configured store directory, or in memory when none is given.
pub fn serve(cfg: &RunConfig) -> Result<(), RunError> {
    use crate::telemetry::service::Service;
    use crate::telemetry::store::{FileStore, MemoryStore, Store};

    let addr: std::net::SocketAddr =
        cfg.bind.parse().map_err(|e| RunError::Config(format!("bind address `{}`: {e}", cfg.bind)))?;
    let pack = cfg.level_pack()?;
    let store: Box<dyn Store> = match &cfg.store {
        Some(dir) => {
            let store = FileStore::open(dir)?;
            let mut out = OutDir::create(dir)?;
            out.note("index.json");
            let inputs: Vec<&Path> = cfg.levels.iter().map(PathBuf::as_path).collect();
            out.manifest("serve", cfg, &inputs)?;
            Box::new(store)
        }
        None => Box::new(MemoryStore::new()),
    };
    let svc = Service::new(store, pack).shared();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| RunError::Io(format!("runtime: {e}")))?;
    runtime.block_on(crate::telemetry::http::serve(addr, svc)).map_err(|e| RunError::Io(format!("{addr}: {e}")))
}

#[derive(Debug, Clone)]
pub struct E2eOutcome {
    pub dataset: Dataset,
    pub phase1: Phase1Outcome,
    pub completed: Vec<CompletedLabel>,
    /// Agreement of inferred labels with the simulated ground truth.
    pub inferred_truth_accuracy: f64,
    pub phase2: Phase2Outcome,
    pub correlations: Vec<Correlation>,
}

impl E2eOutcome {
    pub fn phase1_best(&self) -> &CellResult {
        &self.phase1.results[self.phase1.best]
    }

    /// Most accurate row among those using the given reduction label.
    pub fn best_with_transform(&self, label: &str) -> Option<&CellResult> {
        let rows: Vec<CellResult> = self.phase2.results.iter().filter(|r| r.transform == label).cloned().collect();
        let i = best_by_accuracy(&rows)?;
        self.phase2.results.iter().find(|r| r.transform == label && r.algorithm == rows[i].algorithm)
    }
}

/// simulate, extract, preprocess, phase 1, phase 2, correlations, report.
pub fn e2e(cfg: &RunConfig, out: &Path) -> Result<E2eOutcome, RunError> {
    let cohort_dir = out.join("cohort");
    let cohort = simulate(cfg, &cohort_dir)?;
    let dataset = load_dataset(&cohort_dir)?;
    let mut dir = OutDir::create(out)?;
    dir.write("features.csv", &dataset.to_csv())?;

    let (clean, report) = run_preprocess(&behavioral_only(&dataset), &cfg.phase2.preprocess)?;
    dir.write("preprocessed.csv", &clean.to_csv())?;
    dir.write("preprocess_report.json", &(serde_json::to_string_pretty(&report).expect("report") + "\n"))?;

    let (p1, completed) = phase1_on(cfg, &dataset)?;
    write_phase1(&mut dir, &p1, &completed)?;
    let truth: HashMap<&str, bool> = cohort.labels.iter().map(|l| (l.session_id.as_str(), l.suitable)).collect();
    let inferred: Vec<&CompletedLabel> = completed.iter().filter(|c| c.inferred).collect();
    let agree = inferred.iter().filter(|c| truth.get(c.session_id.as_str()) == Some(&c.suitable)).count();
    let inferred_truth_accuracy = if inferred.is_empty() { 1.0 } else { agree as f64 / inferred.len() as f64 };

    let labeled = apply_completed(&dataset, &completed)?;
    let p2 = run_phase2(&labeled, &cfg.phase2, cfg.stage_seed("phase2"))?;
    write_phase2(&mut dir, &p2)?;

    let correlations = correlations_of(&labeled, cfg.correlation_threshold);
    dir.table("correlations", &correlation_table(&correlations))?;
    dir.note("cohort/manifest.json");
    dir.manifest("e2e", cfg, &[])?;
    Ok(E2eOutcome { dataset, phase1: p1, completed, inferred_truth_accuracy, phase2: p2, correlations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_line_is_single_line_json_message() {
        let e = RunError::Config("bad\nvalue \"x\"".into());
        let line = e.line();
        assert!(!line.contains('\n'));
        assert_eq!(line, r#"error kind=config message="bad\nvalue \"x\"""#);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        let partial: RunConfig = toml::from_str("seed = 5\n[phase2.cv]\nk = 4\n").unwrap();
        assert_eq!((partial.seed, partial.phase2.cv.k, partial.phase1.cv.k), (5, 4, 5));
    }
}
