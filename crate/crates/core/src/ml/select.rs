//! Feature selection strategies. Each returns column indices into the
//! training matrix; ties go to the lower column index, which is catalog
//! order for extracted datasets.

use serde::{Deserialize, Serialize};

use super::models::{train, ModelSpec};
use super::MlError;
use crate::features::preprocess::pearson;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Selection {
    /// Keeps features whose absolute correlation with the label is at
    /// least `threshold`, strongest first, at most `k` of them.
    ByCorrelation {
        threshold: f64,
        #[serde(default)]
        k: Option<usize>,
    },
    Univariate { k: usize },
    /// Elimination driven by `estimator`; logistic regression by default.
    Rfe {
        k: usize,
        #[serde(default)]
        estimator: Option<ModelSpec>,
    },
    RfImportance { k: usize },
}

impl Selection {
    pub fn label(&self) -> &'static str {
        match self {
            Selection::ByCorrelation { .. } => "Correlation",
            Selection::Univariate { .. } => "Univariate",
            Selection::Rfe { .. } => "RFE",
            Selection::RfImportance { .. } => "RF Importance",
        }
    }

    /// Fixed feature count, if the strategy has one.
    pub fn k(&self) -> Option<usize> {
        match self {
            Selection::ByCorrelation { k, .. } => *k,
            Selection::Univariate { k } | Selection::Rfe { k, .. } | Selection::RfImportance { k } => Some(*k),
        }
    }

    pub fn validate(&self) -> Result<(), MlError> {
        match self {
            Selection::ByCorrelation { threshold, .. } if !(*threshold >= 0.0 && *threshold < 1.0) => {
                Err(MlError::Config(format!("correlation threshold {threshold} is outside [0,1)")))
            }
            s if s.k() == Some(0) => Err(MlError::Input("selection k must be positive".into())),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, x: &[Vec<f64>], y: &[bool], seed: u64) -> Result<Vec<usize>, MlError> {
        self.validate()?;
        let d = x.first().map_or(0, Vec::len);
        if let Some(k) = self.k() {
            if k > d {
                return Err(MlError::Input(format!("selection k = {k} exceeds {d} available features")));
            }
        }
        match self {
            Selection::ByCorrelation { threshold, k } => by_correlation(x, y, *threshold, *k),
            Selection::Univariate { k } => Ok(top_k(&anova_f(x, y), *k)),
            Selection::Rfe { k, estimator } => rfe(x, y, *k, estimator.as_ref().unwrap_or(&ModelSpec::logistic()), seed),
            Selection::RfImportance { k } => rf_importance(x, y, *k, seed),
        }
    }
}

fn column(x: &[Vec<f64>], j: usize) -> Vec<f64> {
    x.iter().map(|r| r[j]).collect()
}

/// Indices of the `k` largest scores, in descending score order.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Absolute point-biserial correlation per feature; constant features get 0.
pub fn label_correlations(x: &[Vec<f64>], y: &[bool]) -> Vec<f64> {
    let yf: Vec<f64> = y.iter().map(|&b| f64::from(u8::from(b))).collect();
    let d = x.first().map_or(0, Vec::len);
    (0..d).map(|j| pearson(&column(x, j), &yf).map_or(0.0, f64::abs)).collect()
}

pub fn by_correlation(x: &[Vec<f64>], y: &[bool], threshold: f64, k: Option<usize>) -> Result<Vec<usize>, MlError> {
    let r = label_correlations(x, y);
    let mut picked = top_k(&r, r.len());
    picked.retain(|&j| r[j] >= threshold);
    if let Some(k) = k {
        picked.truncate(k);
    }
    if picked.is_empty() {
        return Err(MlError::Input(format!("no feature reaches |r| >= {threshold}")));
    }
    Ok(picked)
}

/// One-way ANOVA F statistic per feature for two groups. Constant features
/// score 0.
pub fn anova_f(x: &[Vec<f64>], y: &[bool]) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    let n = x.len() as f64;
    (0..d)
        .map(|j| {
            let (mut s, mut c) = ([0.0; 2], [0.0; 2]);
            for (r, &t) in x.iter().zip(y) {
                s[usize::from(t)] += r[j];
                c[usize::from(t)] += 1.0;
            }
            let grand = (s[0] + s[1]) / n;
            let means = [s[0] / c[0], s[1] / c[1]];
            let between: f64 = (0..2).map(|g| c[g] * (means[g] - grand).powi(2)).sum();
            let within: f64 = x.iter().zip(y).map(|(r, &t)| (r[j] - means[usize::from(t)]).powi(2)).sum();
            let df_within = n - 2.0;
            if within <= 0.0 {
                if between > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                between / (within / df_within)
            }
        })
        .collect()
}

/// Recursive elimination: drops the features the estimator weighs least,
/// 10% of the remainder per step. Linear estimators are weighed by absolute
/// coefficients, forests by impurity importance.
pub fn rfe(x: &[Vec<f64>], y: &[bool], k: usize, estimator: &ModelSpec, seed: u64) -> Result<Vec<usize>, MlError> {
    let d = x.first().map_or(0, Vec::len);
    let mut active: Vec<usize> = (0..d).collect();
    while active.len() > k {
        let sub: Vec<Vec<f64>> = x.iter().map(|r| active.iter().map(|&j| r[j]).collect()).collect();
        let model = train(estimator, &sub, y, seed)?;
        let w = model.coefficients().or_else(|| model.importances()).ok_or_else(|| {
            MlError::Config(format!("rfe estimator {} exposes neither coefficients nor importances", estimator.name))
        })?;
        let step = ((active.len() as f64 * 0.1).ceil() as usize).clamp(1, active.len() - k);
        let mut order: Vec<usize> = (0..active.len()).collect();
        // Weakest first; among equals the later column goes first.
        order.sort_by(|&a, &b| w[a].abs().total_cmp(&w[b].abs()).then(b.cmp(&a)));
        let mut drop: Vec<usize> = order[..step].to_vec();
        drop.sort_unstable_by(|a, b| b.cmp(a));
        for i in drop {
            active.remove(i);
        }
    }
    Ok(active)
}

pub fn rf_importance(x: &[Vec<f64>], y: &[bool], k: usize, seed: u64) -> Result<Vec<usize>, MlError> {
    let model = train(&ModelSpec::random_forest(), x, y, seed)?;
    Ok(top_k(model.importances().expect("forest"), k))
}
