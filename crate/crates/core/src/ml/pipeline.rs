//! Cross-validated evaluation with fold-local fitting, and the two phases:
//! questionnaire-based label completion, then the behaviour-only grid.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{oversample_random, stratified_kfold, Fold};
use super::metrics::{Averaging, Confusion, Metrics};
use super::models::{train, ModelKind, ModelSpec};
use super::reduce::{Projection, Reduction, Shrinkage};
use super::select::Selection;
use super::MlError;
use crate::features::preprocess::{behavioral_only, pearson_complete, preprocess, reject_questionnaire, MinMaxScaler, PreprocessConfig, PreprocessReport};
use crate::features::{Dataset, Label};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "snake_case")]
pub enum Transform {
    None,
    Select(Selection),
    Reduce(Reduction),
}

impl Transform {
    pub fn label(&self) -> &'static str {
        match self {
            Transform::None => "--",
            Transform::Select(s) => s.label(),
            Transform::Reduce(r) => r.label(),
        }
    }

    fn key(&self) -> String {
        format!("{self:?}")
    }
}

/// One grid entry: a model, the feature transform ahead of it, and whether
/// the training folds are oversampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub model: ModelSpec,
    pub transform: Transform,
    pub oversample: bool,
}

impl Cell {
    pub fn algorithm(&self) -> String {
        if self.oversample {
            format!("{} Oversample", self.model.name)
        } else {
            self.model.name.clone()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Cell,
    pub algorithm: String,
    pub transform: String,
    /// Columns entering the model; `None` when it varies across folds.
    pub n_features: Option<usize>,
    /// Mean of the per-fold validation metrics.
    pub metrics: Metrics,
    pub per_fold: Vec<Metrics>,
    /// Validation counts summed over folds.
    pub confusion: Confusion,
    /// Mean per-fold metrics on the (non-duplicated) training rows.
    pub train_metrics: Metrics,
    /// Train accuracy minus validation accuracy.
    pub gap: f64,
}

/// Rows used to fit one fold-local component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub fold: usize,
    pub component: String,
    pub fit_rows: Vec<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Audit {
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
    pub entries: Vec<AuditEntry>,
}

impl Audit {
    /// Fails if any component saw a validation row of its own fold.
    pub fn check(&self) -> Result<(), MlError> {
        for e in &self.entries {
            let Some((_, validation)) = self.folds.get(e.fold) else {
                return Err(MlError::Leakage(format!("{} refers to unknown fold {}", e.component, e.fold)));
            };
            if let Some(r) = e.fit_rows.iter().find(|r| validation.binary_search(r).is_ok()) {
                return Err(MlError::Leakage(format!("{} in fold {} was fitted on validation row {r}", e.component, e.fold)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub averaging: Averaging,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { k: 5, averaging: Averaging::Macro }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridOutcome {
    pub results: Vec<CellResult>,
    pub audit: Audit,
}

/// Column means over `rows`; columns with no observed value get 0.5.
fn fit_means(x: &[Vec<f64>], rows: &[usize]) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    (0..d)
        .map(|j| {
            let vals: Vec<f64> = rows.iter().map(|&i| x[i][j]).filter(|v| !v.is_nan()).collect();
            if vals.is_empty() {
                0.5
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        })
        .collect()
}

fn impute(x: &mut [Vec<f64>], means: &[f64]) {
    for r in x {
        for (v, m) in r.iter_mut().zip(means) {
            if v.is_nan() {
                *v = *m;
            }
        }
    }
}

/// Scales with statistics from `rows`, then fills gaps with their means.
fn scale_and_impute(x: &[Vec<f64>], rows: &[usize]) -> Vec<Vec<f64>> {
    let scaler = MinMaxScaler::fit(x, rows);
    let mut z = scaler.transform(x);
    let means = fit_means(&z, rows);
    impute(&mut z, &means);
    z
}

fn gather(x: &[Vec<f64>], rows: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|&i| x[i].clone()).collect()
}

fn gather_y(y: &[bool], rows: &[usize]) -> Vec<bool> {
    rows.iter().map(|&i| y[i]).collect()
}

struct Prepared {
    matrix: Vec<Vec<f64>>,
    width: usize,
    /// Rows the selector or reducer was fitted on.
    fit_rows: Vec<usize>,
}

fn apply_transform(t: &Transform, base: &[Vec<f64>], y: &[bool], train_rows: &[usize], seed: u64) -> Result<Prepared, MlError> {
    let tx = gather(base, train_rows);
    let ty = gather_y(y, train_rows);
    match t {
        Transform::None => Ok(Prepared { matrix: base.to_vec(), width: base.first().map_or(0, Vec::len), fit_rows: Vec::new() }),
        Transform::Select(s) => {
            let cols = s.apply(&tx, &ty, seed)?;
            let matrix = base.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
            Ok(Prepared { matrix, width: cols.len(), fit_rows: train_rows.to_vec() })
        }
        Transform::Reduce(r) => {
            let p: Projection = r.fit(&tx, &ty)?;
            let projected = p.transform(base);
            let matrix = MinMaxScaler::fit(&projected, train_rows).transform(&projected);
            let width = matrix.first().map_or(0, Vec::len);
            Ok(Prepared { matrix, width, fit_rows: train_rows.to_vec() })
        }
    }
}

/// Cross-validates every cell on the same stratified folds. All scaling,
/// imputation, selection, reduction and model fitting inside a fold uses
/// that fold's training rows only.
pub fn evaluate_grid(x: &[Vec<f64>], y: &[bool], cells: &[Cell], cv: &CvConfig, seed: u64) -> Result<GridOutcome, MlError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(MlError::Input(format!("{} rows vs {} labels", x.len(), y.len())));
    }
    let folds: Vec<Fold> = stratified_kfold(y, cv.k, rng::derive_named(seed, "folds"))?;
    let mut audit = Audit { folds: folds.iter().map(|f| (f.train.clone(), f.validation.clone())).collect(), entries: Vec::new() };

    let bases: Vec<Vec<Vec<f64>>> = folds.iter().map(|f| scale_and_impute(x, &f.train)).collect();
    for (i, f) in folds.iter().enumerate() {
        for component in ["scaler", "imputer"] {
            audit.entries.push(AuditEntry { fold: i, component: component.into(), fit_rows: f.train.clone() });
        }
    }

    let mut transforms: Vec<&Transform> = Vec::new();
    for c in cells {
        if !transforms.iter().any(|t| t.key() == c.transform.key()) {
            transforms.push(&c.transform);
        }
    }
    let jobs: Vec<(usize, usize)> = (0..transforms.len()).flat_map(|t| (0..folds.len()).map(move |f| (t, f))).collect();
    let prepared: Vec<Prepared> = jobs
        .par_iter()
        .map(|&(t, f)| {
            let s = rng::derive_named(seed, &format!("transform/{}/{f}", transforms[t].key()));
            apply_transform(transforms[t], &bases[f], y, &folds[f].train, s)
        })
        .collect::<Result<_, _>>()?;
    let mut by_key: BTreeMap<String, usize> = BTreeMap::new();
    for (t, tr) in transforms.iter().enumerate() {
        by_key.insert(tr.key(), t);
        let role = match tr {
            Transform::None => continue,
            Transform::Select(_) => "selector",
            Transform::Reduce(_) => "reducer",
        };
        for f in 0..folds.len() {
            let fit_rows = prepared[t * folds.len() + f].fit_rows.clone();
            audit.entries.push(AuditEntry { fold: f, component: format!("{role} {}", tr.key()), fit_rows });
        }
    }

    struct FoldRun {
        fit_rows: Vec<usize>,
        val: (Vec<bool>, Vec<bool>),
        train: (Vec<bool>, Vec<bool>),
        width: usize,
    }
    let cell_jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..folds.len()).map(move |f| (c, f))).collect();
    let runs: Vec<FoldRun> = cell_jobs
        .par_iter()
        .map(|&(c, f)| {
            let cell = &cells[c];
            let prep = &prepared[by_key[&cell.transform.key()] * folds.len() + f];
            let fold = &folds[f];
            let cell_seed = rng::derive_named(seed, &format!("cell/{}/{}/{}/{f}", cell.model.name, cell.transform.key(), cell.oversample));
            let fit_rows =
                if cell.oversample { oversample_random(&fold.train, y, rng::derive(cell_seed, 1)) } else { fold.train.clone() };
            let model = train(&cell.model, &gather(&prep.matrix, &fit_rows), &gather_y(y, &fit_rows), cell_seed)?;
            let predict = |rows: &[usize]| (gather_y(y, rows), rows.iter().map(|&i| model.predict(&prep.matrix[i])).collect());
            Ok(FoldRun { fit_rows, val: predict(&fold.validation), train: predict(&fold.train), width: prep.width })
        })
        .collect::<Result<_, MlError>>()?;

    let mut results = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let mut val = Confusion::default();
        let mut per_fold = Vec::with_capacity(folds.len());
        let mut per_fold_train = Vec::with_capacity(folds.len());
        let mut widths = Vec::new();
        for f in 0..folds.len() {
            let run = &runs[c * folds.len() + f];
            let v = Confusion::count(&run.val.0, &run.val.1);
            val.tp += v.tp;
            val.fp += v.fp;
            val.fn_ += v.fn_;
            val.tn += v.tn;
            per_fold.push(Metrics::from_confusion_with(&v, cv.averaging));
            per_fold_train.push(Metrics::from_confusion_with(&Confusion::count(&run.train.0, &run.train.1), cv.averaging));
            widths.push(run.width);
            if cell.oversample {
                audit.entries.push(AuditEntry { fold: f, component: format!("oversampler {}", cell.algorithm()), fit_rows: run.fit_rows.clone() });
            }
            audit.entries.push(AuditEntry { fold: f, component: format!("model {}", cell.algorithm()), fit_rows: run.fit_rows.clone() });
        }
        let metrics = Metrics::mean(&per_fold);
        let train_metrics = Metrics::mean(&per_fold_train);
        let n_features = if widths.iter().all(|&w| w == widths[0]) { Some(widths[0]) } else { None };
        let n_features = match &cell.transform {
            Transform::Select(Selection::ByCorrelation { .. }) => None,
            _ => n_features,
        };
        results.push(CellResult {
            cell: cell.clone(),
            algorithm: cell.algorithm(),
            transform: cell.transform.label().into(),
            n_features,
            metrics,
            per_fold,
            confusion: val,
            train_metrics,
            gap: train_metrics.accuracy - metrics.accuracy,
        });
    }
    audit.check()?;
    Ok(GridOutcome { results, audit })
}

/// Index of the best result by validation accuracy. Ties go to a random
/// forest, then to the earliest entry.
pub fn best_by_accuracy(results: &[CellResult]) -> Option<usize> {
    let is_forest = |r: &CellResult| matches!(r.cell.model.kind, ModelKind::RandomForest { .. });
    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => {
                let (a, c) = (r.metrics.accuracy, results[b].metrics.accuracy);
                a > c || (a == c && is_forest(r) && !is_forest(&results[b]))
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// The six questionnaire answers used to complete labels.
pub const PHASE1_FEATURES: [&str; 6] = [
    "MBTI Thinking-Feeling",
    "MBTI Extraversion-Introversion",
    "MBTI Sensing-Intuition",
    "MBTI Judging-Perceiving",
    "Help-Seeking Behavior",
    "Time Management Ability",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Phase1Config {
    pub features: Vec<String>,
    /// Earlier entries win accuracy ties.
    pub models: Vec<ModelSpec>,
    pub cv: CvConfig,
    pub oversample: bool,
}

impl Default for Phase1Config {
    fn default() -> Self {
        Phase1Config {
            features: PHASE1_FEATURES.iter().map(|s| s.to_string()).collect(),
            models: vec![
                ModelSpec::random_forest(),
                ModelSpec::mlp("MLP-64h", &[64]),
                ModelSpec::mlp("MLP-22-63h", &[22, 63]),
                ModelSpec::svm(),
                ModelSpec::logistic(),
                ModelSpec::gbm(),
            ],
            cv: CvConfig::default(),
            oversample: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Phase1Outcome {
    pub results: Vec<CellResult>,
    pub best: usize,
    /// Every row labeled: given labels kept, the rest predicted.
    pub completed: Vec<bool>,
    /// `true` where the label was predicted.
    pub inferred: Vec<bool>,
    pub audit: Audit,
}

fn labeled_xy(ds: &Dataset) -> (Vec<usize>, Vec<Vec<f64>>, Vec<bool>) {
    let rows = ds.labeled_rows();
    let x = gather(&ds.rows, &rows);
    let y = rows.iter().map(|&i| ds.labels[i].as_bool().expect("labeled row")).collect();
    (rows, x, y)
}

/// Cross-validates the questionnaire models on the labeled rows, refits the
/// most accurate on all of them and predicts the unlabeled rows.
pub fn phase1(ds: &Dataset, cfg: &Phase1Config, seed: u64) -> Result<Phase1Outcome, MlError> {
    if cfg.models.is_empty() {
        return Err(MlError::Config("phase 1 needs at least one model".into()));
    }
    let sub = ds.select_names(&cfg.features)?;
    let (rows, x, y) = labeled_xy(&sub);
    if rows.is_empty() {
        return Err(MlError::Input("phase 1 needs labeled rows".into()));
    }
    let cells: Vec<Cell> =
        cfg.models.iter().map(|m| Cell { model: m.clone(), transform: Transform::None, oversample: cfg.oversample }).collect();
    let grid = evaluate_grid(&x, &y, &cells, &cfg.cv, rng::derive_named(seed, "phase1"))?;
    let best = best_by_accuracy(&grid.results).expect("non-empty grid");

    let all: Vec<usize> = (0..x.len()).collect();
    let z = {
        let scaler = MinMaxScaler::fit(&x, &all);
        let scaled = scaler.transform(&x);
        let means = fit_means(&scaled, &all);
        let mut full = scaler.transform(&sub.rows);
        impute(&mut full, &means);
        full
    };
    let fit_rows = if cfg.oversample { oversample_random(&all, &y, rng::derive_named(seed, "phase1/final/oversample")) } else { all };
    let fx: Vec<Vec<f64>> = fit_rows.iter().map(|&i| z[rows[i]].clone()).collect();
    let model = train(&cfg.models[best], &fx, &gather_y(&y, &fit_rows), rng::derive_named(seed, "phase1/final"))?;
    let mut completed = Vec::with_capacity(ds.n_rows());
    let mut inferred = Vec::with_capacity(ds.n_rows());
    for (i, label) in ds.labels.iter().enumerate() {
        match label.as_bool() {
            Some(b) => {
                completed.push(b);
                inferred.push(false);
            }
            None => {
                completed.push(model.predict(&z[i]));
                inferred.push(true);
            }
        }
    }
    Ok(Phase1Outcome { results: grid.results, best, completed, inferred, audit: grid.audit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Phase2Config {
    pub preprocess: PreprocessConfig,
    pub correlation_threshold: f64,
    pub ks: Vec<usize>,
    pub pca_components: usize,
    pub models: Vec<ModelSpec>,
    pub oversample: Vec<bool>,
    pub lda_shrinkage: Shrinkage,
    pub cv: CvConfig,
}

impl Default for Phase2Config {
    fn default() -> Self {
        Phase2Config {
            preprocess: PreprocessConfig::default(),
            correlation_threshold: 0.25,
            ks: vec![5, 10, 15],
            pca_components: 5,
            models: vec![
                ModelSpec::logistic(),
                ModelSpec::svm(),
                ModelSpec::random_forest(),
                ModelSpec::gbm(),
                ModelSpec::mlp("MLP", &[64]),
            ],
            oversample: vec![false, true],
            lda_shrinkage: Shrinkage::LedoitWolf,
            cv: CvConfig::default(),
        }
    }
}

impl Phase2Config {
    pub fn transforms(&self) -> Vec<Transform> {
        let mut out = vec![Transform::Select(Selection::ByCorrelation { threshold: self.correlation_threshold, k: None })];
        for &k in &self.ks {
            out.push(Transform::Select(Selection::Univariate { k }));
        }
        for &k in &self.ks {
            out.push(Transform::Select(Selection::Rfe { k, estimator: None }));
        }
        for &k in &self.ks {
            out.push(Transform::Select(Selection::RfImportance { k }));
        }
        out.push(Transform::Reduce(Reduction::Lda { shrinkage: self.lda_shrinkage }));
        out.push(Transform::Reduce(Reduction::Pca { components: self.pca_components }));
        out
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for t in self.transforms() {
            for m in &self.models {
                for &o in &self.oversample {
                    cells.push(Cell { model: m.clone(), transform: t.clone(), oversample: o });
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Phase2Outcome {
    pub preprocess: PreprocessReport,
    pub feature_names: Vec<String>,
    pub results: Vec<CellResult>,
    pub audit: Audit,
}

/// Drops questionnaire columns, preprocesses, and cross-validates the
/// selection and reduction grid. Every row must carry a label.
pub fn phase2(ds: &Dataset, cfg: &Phase2Config, seed: u64) -> Result<Phase2Outcome, MlError> {
    if let Some(i) = ds.labels.iter().position(|l| *l == Label::Unlabeled) {
        return Err(MlError::Input(format!("row `{}` has no label; run phase 1 first", ds.ids[i])));
    }
    if cfg.models.is_empty() || cfg.oversample.is_empty() {
        return Err(MlError::Config("phase 2 needs at least one model and one oversampling mode".into()));
    }
    let behavioral = behavioral_only(ds);
    let (clean, report) = preprocess(&behavioral, &cfg.preprocess)?;
    reject_questionnaire(&clean)?;
    let (_, x, y) = labeled_xy(&clean);
    let grid = evaluate_grid(&x, &y, &cfg.cells(), &cfg.cv, rng::derive_named(seed, "phase2"))?;
    Ok(Phase2Outcome { preprocess: report, feature_names: clean.feature_names.clone(), results: grid.results, audit: grid.audit })
}

/// Behavioural features expected to track suitability, with the expected
/// sign of their correlation.
pub const SIGNATURES: [(&str, f64); 6] = [
    ("Puzzle Games: Total Win Count", 1.0),
    ("Side Challenges: Completed Count", 1.0),
    ("Menu Navigation Interaction Count", 1.0),
    ("Total Gameplay Pause Count", -1.0),
    ("Total Game Restart Count", -1.0),
    ("Total Surrender Action Count", -1.0),
];

/// Pearson correlation of every feature with the label over labeled rows.
/// Constant features are left out.
pub fn label_correlations(ds: &Dataset) -> Vec<(String, f64)> {
    let rows = ds.labeled_rows();
    let y: Vec<f64> = rows.iter().map(|&i| f64::from(u8::from(ds.labels[i].as_bool().expect("labeled")))).collect();
    (0..ds.n_features())
        .filter_map(|j| {
            let col: Vec<f64> = rows.iter().map(|&i| ds.rows[i][j]).collect();
            pearson_complete(&col, &y).ok().map(|r| (ds.feature_names[j].clone(), r))
        })
        .collect()
}
