//! Column filters, min-max scaling and Pearson correlation.

use serde::{Deserialize, Serialize};

use super::catalog::{is_questionnaire, rank};
use super::{Dataset, FeatureError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub min_coverage: f64,
    pub variance_eps: f64,
    pub correlation_threshold: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig { min_coverage: 0.7, variance_eps: 1e-8, correlation_threshold: 0.95 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub low_coverage: Vec<String>,
    pub near_zero_variance: Vec<String>,
    pub correlated: Vec<String>,
    pub kept: Vec<String>,
}

fn keep_where(ds: &Dataset, keep: impl Fn(usize) -> bool) -> (Dataset, Vec<String>) {
    let (kept, dropped): (Vec<usize>, Vec<usize>) = (0..ds.n_features()).partition(|&j| keep(j));
    (ds.select(&kept), dropped.into_iter().map(|j| ds.feature_names[j].clone()).collect())
}

/// Removes features whose non-missing fraction is below `min_fraction`.
pub fn drop_low_coverage(ds: &Dataset, min_fraction: f64) -> Result<(Dataset, Vec<String>), FeatureError> {
    if !(min_fraction > 0.0 && min_fraction <= 1.0) {
        return Err(FeatureError::Input(format!("min_fraction {min_fraction} is outside (0,1]")));
    }
    let n = ds.n_rows().max(1) as f64;
    Ok(keep_where(ds, |j| {
        let present = ds.rows.iter().filter(|r| !r[j].is_nan()).count() as f64;
        present / n >= min_fraction
    }))
}

fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Removes numeric features with sample variance `<= eps` and categorical
/// features with a single observed value.
pub fn drop_near_zero_variance(ds: &Dataset, eps: f64) -> Result<(Dataset, Vec<String>), FeatureError> {
    if !(eps >= 0.0) {
        return Err(FeatureError::Input(format!("variance eps {eps} is negative")));
    }
    Ok(keep_where(ds, |j| {
        let xs: Vec<f64> = ds.rows.iter().map(|r| r[j]).filter(|v| !v.is_nan()).collect();
        if ds.categorical[j] {
            xs.iter().any(|&v| v != xs[0])
        } else {
            sample_variance(&xs) > eps
        }
    }))
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, FeatureError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(FeatureError::Input(format!("pearson needs two equal-length inputs of size >= 2 (got {} and {})", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(FeatureError::Undefined("constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson over rows where both values are present.
pub fn pearson_complete(x: &[f64], y: &[f64]) -> Result<f64, FeatureError> {
    let (a, b): (Vec<f64>, Vec<f64>) = x.iter().zip(y).filter(|(a, b)| !a.is_nan() && !b.is_nan()).map(|(a, b)| (*a, *b)).unzip();
    pearson(&a, &b)
}

/// Greedy pass in catalog order: a feature is kept unless it correlates
/// above `threshold` (in absolute value) with an already kept one. The
/// output keeps the input column order.
pub fn prune_correlated(ds: &Dataset, threshold: f64) -> Result<(Dataset, Vec<String>), FeatureError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(FeatureError::Input(format!("correlation threshold {threshold} is outside (0,1)")));
    }
    let mut order: Vec<usize> = (0..ds.n_features()).collect();
    order.sort_by_key(|&j| (rank(&ds.feature_names[j]), j));
    let cols: Vec<Vec<f64>> = (0..ds.n_features()).map(|j| ds.column(j)).collect();
    let mut kept: Vec<usize> = Vec::new();
    for j in order {
        let redundant = kept.iter().any(|&k| pearson_complete(&cols[k], &cols[j]).is_ok_and(|r| r.abs() > threshold));
        if !redundant {
            kept.push(j);
        }
    }
    let mut keep = vec![false; ds.n_features()];
    for j in kept {
        keep[j] = true;
    }
    Ok(keep_where(ds, |j| keep[j]))
}

/// The full column-filter stack in order: coverage, variance, correlation.
pub fn preprocess(ds: &Dataset, cfg: &PreprocessConfig) -> Result<(Dataset, PreprocessReport), FeatureError> {
    let (ds, low_coverage) = drop_low_coverage(ds, cfg.min_coverage)?;
    let (ds, near_zero_variance) = drop_near_zero_variance(&ds, cfg.variance_eps)?;
    let (ds, correlated) = prune_correlated(&ds, cfg.correlation_threshold)?;
    let kept = ds.feature_names.clone();
    Ok((ds, PreprocessReport { low_coverage, near_zero_variance, correlated, kept }))
}

/// Fails on the first questionnaire-derived column.
pub fn reject_questionnaire(ds: &Dataset) -> Result<(), FeatureError> {
    match ds.feature_names.iter().find(|n| is_questionnaire(n)) {
        Some(n) => Err(FeatureError::Input(format!("questionnaire column `{n}` in a behaviour-only dataset"))),
        None => Ok(()),
    }
}

/// Removes questionnaire-derived columns.
pub fn behavioral_only(ds: &Dataset) -> Dataset {
    keep_where(ds, |j| !is_questionnaire(&ds.feature_names[j])).0
}

/// Per-feature min-max scaler. Constant features map to 0.5; `NaN` passes
/// through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    /// Fits on `rows` only.
    pub fn fit(x: &[Vec<f64>], rows: &[usize]) -> MinMaxScaler {
        let d = x.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for &i in rows {
            for (j, &v) in x[i].iter().enumerate() {
                if !v.is_nan() {
                    min[j] = min[j].min(v);
                    max[j] = max[j].max(v);
                }
            }
        }
        for j in 0..d {
            if min[j] > max[j] {
                min[j] = 0.0;
                max[j] = 0.0;
            }
        }
        MinMaxScaler { min, max }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.max[j] - self.min[j];
                if v.is_nan() {
                    v
                } else if span == 0.0 {
                    0.5
                } else {
                    (v - self.min[j]) / span
                }
            })
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Inverse map; constant features return their single fitted value.
    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &v)| self.min[j] + v * (self.max[j] - self.min[j])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Label;

    fn ds(names: &[&str], cat: &[bool], rows: Vec<Vec<f64>>) -> Dataset {
        let n = rows.len();
        Dataset::new(
            (0..n).map(|i| format!("r{i}")).collect(),
            names.iter().map(|s| s.to_string()).collect(),
            cat.to_vec(),
            rows,
            vec![Label::Unlabeled; n],
        )
        .unwrap()
    }

    #[test]
    fn coverage_boundary_is_inclusive() {
        let nan = f64::NAN;
        let d = ds(
            &["a", "b", "c"],
            &[false; 3],
            vec![vec![1.0, 1.0, nan], vec![2.0, nan, nan], vec![3.0, 1.0, nan], vec![4.0, nan, nan], vec![5.0, 1.0, nan], vec![6.0, 1.0, nan], vec![7.0, 1.0, nan], vec![8.0, 1.0, nan], vec![9.0, 1.0, nan], vec![0.0, 1.0, nan]],
        );
        let (out, removed) = drop_low_coverage(&d, 0.8).unwrap();
        assert_eq!(out.feature_names, vec!["a", "b"]);
        assert_eq!(removed, vec!["c"]);
        let (dense, removed) = drop_low_coverage(&out.select(&[0]), 1.0).unwrap();
        assert!(removed.is_empty());
        assert_eq!(dense.n_features(), 1);
    }

    #[test]
    fn variance_filter() {
        let d = ds(&["const", "alt", "tiny"], &[false, true, false], (0..6).map(|i| vec![3.0, (i % 2) as f64, 1.0 + 1e-9 * i as f64]).collect());
        let (out, removed) = drop_near_zero_variance(&d, 1e-8).unwrap();
        assert_eq!(out.feature_names, vec!["alt"]);
        assert_eq!(removed, vec!["const", "tiny"]);
        let (exact, _) = drop_near_zero_variance(&d, 0.0).unwrap();
        assert_eq!(exact.feature_names, vec!["alt", "tiny"]);
        let (twice, _) = drop_near_zero_variance(&out, 1e-8).unwrap();
        assert_eq!(twice, out);
    }

    #[test]
    fn correlated_later_catalog_entry_is_dropped() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| {
            let x = i as f64;
            vec![-x, ((i * 7) % 10) as f64, x]
        }).collect();
        // Catalog order: Total Gameplay Log Count precedes Total Win Count.
        let d = ds(&["Total Win Count", "Total Lose Count", "Total Gameplay Log Count"], &[false; 3], rows);
        let (out, removed) = prune_correlated(&d, 0.95).unwrap();
        assert_eq!(removed, vec!["Total Win Count"]);
        assert_eq!(out.feature_names, vec!["Total Lose Count", "Total Gameplay Log Count"]);
    }

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 4.0, 7.0, 11.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(pearson(&x, &[2.0; 5]), Err(FeatureError::Undefined(_))));
        // Independent evaluation of the textbook formula.
        let r = pearson(&x, &[3.0, 1.0, 4.0, 1.0, 5.0]).unwrap();
        assert!((r - 0.44726652958258395).abs() < 1e-12, "{r}");
    }

    #[test]
    fn min_max_scaler() {
        let x = vec![vec![0.0, 7.0], vec![5.0, 7.0], vec![10.0, 7.0]];
        let s = MinMaxScaler::fit(&x, &[0, 1, 2]);
        assert_eq!(s.transform(&x), vec![vec![0.0, 0.5], vec![0.5, 0.5], vec![1.0, 0.5]]);
        let s = MinMaxScaler::fit(&x, &[0, 2]);
        assert_eq!(s.transform_row(&[5.0, 7.0]), vec![0.5, 0.5]);
        let back = s.inverse_row(&s.transform_row(&[3.3, 7.0]));
        assert!((back[0] - 3.3).abs() < 1e-12 && back[1] == 7.0);
    }

    #[test]
    fn questionnaire_columns_are_rejected_by_name() {
        let d = ds(&["Total Win Count", "MBTI Thinking-Feeling"], &[false, true], vec![vec![1.0, 0.0]]);
        let err = reject_questionnaire(&d).unwrap_err().to_string();
        assert!(err.contains("MBTI Thinking-Feeling"));
        assert!(reject_questionnaire(&behavioral_only(&d)).is_ok());
    }
}
