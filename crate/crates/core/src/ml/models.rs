//! Binary classifiers: logistic regression, linear SVM, random forest,
//! gradient-boosted stumps and the MLP wrapper.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::mlp::MlpNet;
use super::MlError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    LogisticRegression {
        #[serde(default = "d_l2")]
        l2: f64,
        #[serde(default = "d_epochs_linear")]
        epochs: usize,
        #[serde(default = "d_lr_lr")]
        learning_rate: f64,
    },
    LinearSvm {
        #[serde(default = "d_l2")]
        l2: f64,
        #[serde(default = "d_epochs_linear")]
        epochs: usize,
        #[serde(default = "d_lr_svm")]
        learning_rate: f64,
    },
    RandomForest {
        #[serde(default = "d_trees")]
        n_trees: usize,
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "d_true")]
        bootstrap: bool,
        #[serde(default = "d_max_features")]
        max_features: MaxFeatures,
    },
    GbmStumps {
        #[serde(default = "d_rounds")]
        rounds: usize,
        #[serde(default = "d_lr_gbm")]
        learning_rate: f64,
    },
    Mlp {
        hidden_layers: Vec<usize>,
        #[serde(default = "d_epochs_mlp")]
        epochs: usize,
        #[serde(default = "d_batch")]
        batch_size: usize,
        #[serde(default = "d_lr_mlp")]
        learning_rate: f64,
        #[serde(default = "d_mlp_l2")]
        l2: f64,
    },
}

fn d_l2() -> f64 {
    1e-3
}
fn d_epochs_linear() -> usize {
    1000
}
fn d_lr_lr() -> f64 {
    0.5
}
fn d_lr_svm() -> f64 {
    0.1
}
fn d_trees() -> usize {
    100
}
fn d_true() -> bool {
    true
}
fn d_max_features() -> MaxFeatures {
    MaxFeatures::Sqrt
}
fn d_rounds() -> usize {
    100
}
fn d_lr_gbm() -> f64 {
    0.1
}
fn d_epochs_mlp() -> usize {
    500
}
fn d_batch() -> usize {
    16
}
fn d_lr_mlp() -> f64 {
    0.01
}
fn d_mlp_l2() -> f64 {
    1e-4
}

/// A named model configuration, as it appears in result tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ModelKind,
}

impl ModelSpec {
    pub fn logistic() -> ModelSpec {
        ModelSpec {
            name: "LR".into(),
            kind: ModelKind::LogisticRegression { l2: d_l2(), epochs: d_epochs_linear(), learning_rate: d_lr_lr() },
        }
    }

    pub fn svm() -> ModelSpec {
        ModelSpec {
            name: "SVM".into(),
            kind: ModelKind::LinearSvm { l2: d_l2(), epochs: d_epochs_linear(), learning_rate: d_lr_svm() },
        }
    }

    pub fn random_forest() -> ModelSpec {
        ModelSpec {
            name: "RF".into(),
            kind: ModelKind::RandomForest {
                n_trees: d_trees(),
                max_depth: None,
                bootstrap: true,
                max_features: MaxFeatures::Sqrt,
            },
        }
    }

    pub fn gbm() -> ModelSpec {
        ModelSpec { name: "GBM".into(), kind: ModelKind::GbmStumps { rounds: d_rounds(), learning_rate: d_lr_gbm() } }
    }

    pub fn mlp(name: &str, hidden: &[usize]) -> ModelSpec {
        ModelSpec {
            name: name.into(),
            kind: ModelKind::Mlp {
                hidden_layers: hidden.to_vec(),
                epochs: d_epochs_mlp(),
                batch_size: d_batch(),
                learning_rate: d_lr_mlp(),
                l2: d_mlp_l2(),
            },
        }
    }

    pub fn validate(&self) -> Result<(), MlError> {
        let bad = |m: &str| Err(MlError::Config(format!("model {}: {m}", self.name)));
        match &self.kind {
            ModelKind::LogisticRegression { l2, learning_rate, .. } | ModelKind::LinearSvm { l2, learning_rate, .. } => {
                if *l2 < 0.0 || *learning_rate <= 0.0 {
                    return bad("l2 must be >= 0 and learning_rate > 0");
                }
            }
            ModelKind::RandomForest { n_trees, max_depth, .. } => {
                if *n_trees == 0 || *max_depth == Some(0) {
                    return bad("n_trees and max_depth must be positive");
                }
            }
            ModelKind::GbmStumps { rounds, learning_rate } => {
                if *rounds == 0 || *learning_rate <= 0.0 {
                    return bad("rounds and learning_rate must be positive");
                }
            }
            ModelKind::Mlp { hidden_layers, batch_size, learning_rate, l2, .. } => {
                if hidden_layers.is_empty() || hidden_layers.contains(&0) {
                    return bad("hidden_layers must be non-empty and positive");
                }
                if *batch_size == 0 || *learning_rate <= 0.0 || *l2 < 0.0 {
                    return bad("batch_size and learning_rate must be positive");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Linear {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Linear {
    fn margin(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Leaf { p: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { p } => return *p,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: f64,
    pub right: f64,
}

/// A fitted classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Model {
    Logistic(Linear),
    Svm(Linear),
    Forest { trees: Vec<Tree>, importances: Vec<f64> },
    Gbm { base: f64, learning_rate: f64, stumps: Vec<Stump> },
    Mlp(MlpNet),
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Model {
    /// Positive-class score; `predict` thresholds it at [`Model::threshold`].
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Model::Logistic(l) => sigmoid(l.margin(x)),
            Model::Svm(l) => l.margin(x),
            Model::Forest { trees, .. } => trees.iter().map(|t| t.predict(x)).sum::<f64>() / trees.len() as f64,
            Model::Gbm { base, learning_rate, stumps } => {
                base + stumps
                    .iter()
                    .map(|s| learning_rate * if x[s.feature] <= s.threshold { s.left } else { s.right })
                    .sum::<f64>()
            }
            Model::Mlp(net) => net.predict_proba(x),
        }
    }

    pub fn threshold(&self) -> f64 {
        match self {
            Model::Svm(_) | Model::Gbm { .. } => 0.0,
            _ => 0.5,
        }
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.score(x) > self.threshold()
    }

    pub fn predict_all(&self, x: &[Vec<f64>]) -> Vec<bool> {
        x.iter().map(|r| self.predict(r)).collect()
    }

    /// Impurity-based importances, only for forests.
    pub fn importances(&self) -> Option<&[f64]> {
        match self {
            Model::Forest { importances, .. } => Some(importances),
            _ => None,
        }
    }

    /// Linear weights, for linear models.
    pub fn coefficients(&self) -> Option<&[f64]> {
        match self {
            Model::Logistic(l) | Model::Svm(l) => Some(&l.weights),
            _ => None,
        }
    }
}

fn check_inputs(x: &[Vec<f64>], y: &[bool]) -> Result<usize, MlError> {
    if x.is_empty() || x.len() != y.len() {
        return Err(MlError::Input(format!("{} rows vs {} labels", x.len(), y.len())));
    }
    let d = x[0].len();
    for (i, r) in x.iter().enumerate() {
        if r.len() != d {
            return Err(MlError::Input(format!("row {i} has {} features, expected {d}", r.len())));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(MlError::Input(format!("row {i} has a missing or non-finite value")));
        }
    }
    let pos = y.iter().filter(|&&b| b).count();
    if pos == 0 || pos == y.len() {
        return Err(MlError::SingleClass);
    }
    Ok(d)
}

/// Fits `spec` on rows `x` with labels `y`.
pub fn train(spec: &ModelSpec, x: &[Vec<f64>], y: &[bool], seed: u64) -> Result<Model, MlError> {
    spec.validate()?;
    let d = check_inputs(x, y)?;
    let yf: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Ok(match &spec.kind {
        ModelKind::LogisticRegression { l2, epochs, learning_rate } => {
            Model::Logistic(fit_logistic(x, &yf, d, *l2, *epochs, *learning_rate))
        }
        ModelKind::LinearSvm { l2, epochs, learning_rate } => Model::Svm(fit_svm(x, &yf, d, *l2, *epochs, *learning_rate)),
        ModelKind::RandomForest { n_trees, max_depth, bootstrap, max_features } => {
            fit_forest(x, &yf, d, *n_trees, *max_depth, *bootstrap, *max_features, seed)
        }
        ModelKind::GbmStumps { rounds, learning_rate } => fit_gbm(x, &yf, d, *rounds, *learning_rate),
        ModelKind::Mlp { hidden_layers, epochs, batch_size, learning_rate, l2 } => {
            let mut net = MlpNet::init(d, hidden_layers, *l2, rng::derive(seed, 0));
            net.train(x, &yf, *epochs, *batch_size, *learning_rate, rng::derive(seed, 1));
            Model::Mlp(net)
        }
    })
}

fn fit_logistic(x: &[Vec<f64>], y: &[f64], d: usize, l2: f64, epochs: usize, lr: f64) -> Linear {
    let mut m = Linear { weights: vec![0.0; d], bias: 0.0 };
    let n = x.len() as f64;
    for _ in 0..epochs {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (r, &t) in x.iter().zip(y) {
            let e = sigmoid(m.margin(r)) - t;
            for (g, v) in gw.iter_mut().zip(r) {
                *g += e * v;
            }
            gb += e;
        }
        for (w, g) in m.weights.iter_mut().zip(&gw) {
            *w -= lr * (g / n + l2 * *w);
        }
        m.bias -= lr * gb / n;
    }
    m
}

fn fit_svm(x: &[Vec<f64>], y: &[f64], d: usize, l2: f64, epochs: usize, lr: f64) -> Linear {
    let mut m = Linear { weights: vec![0.0; d], bias: 0.0 };
    let n = x.len() as f64;
    for _ in 0..epochs {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (r, &t) in x.iter().zip(y) {
            let s = if t > 0.5 { 1.0 } else { -1.0 };
            if s * m.margin(r) < 1.0 {
                for (g, v) in gw.iter_mut().zip(r) {
                    *g -= s * v;
                }
                gb -= s;
            }
        }
        for (w, g) in m.weights.iter_mut().zip(&gw) {
            *w -= lr * (g / n + l2 * *w);
        }
        m.bias -= lr * gb / n;
    }
    m
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    d: usize,
    mtry: usize,
    max_depth: Option<usize>,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    n_root: f64,
}

impl TreeBuilder<'_> {
    fn best_split(&self, idx: &[usize], features: &[usize]) -> Option<(usize, f64, f64)> {
        let n = idx.len() as f64;
        let pos: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let parent = gini(pos, n);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut tried = 0;
        for &f in features {
            let mut vals: Vec<(f64, f64)> = idx.iter().map(|&i| (self.x[i][f], self.y[i])).collect();
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            if vals[0].0 == vals[vals.len() - 1].0 {
                continue;
            }
            tried += 1;
            let mut lp = 0.0;
            for k in 0..vals.len() - 1 {
                lp += vals[k].1;
                if vals[k].0 == vals[k + 1].0 {
                    continue;
                }
                let ln = (k + 1) as f64;
                let rn = n - ln;
                let child = (ln * gini(lp, ln) + rn * gini(pos - lp, rn)) / n;
                let gain = parent - child;
                if best.is_none_or(|b| gain > b.2 + 1e-12) {
                    best = Some((f, 0.5 * (vals[k].0 + vals[k + 1].0), gain));
                }
            }
            if tried >= self.mtry && best.is_some() {
                break;
            }
        }
        best
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize, rng: &mut rng::Rng) -> usize {
        let n = idx.len() as f64;
        let pos: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { p: pos / n });
        if pos == 0.0 || pos == n || self.max_depth.is_some_and(|m| depth >= m) {
            return id;
        }
        let mut features: Vec<usize> = (0..self.d).collect();
        features.shuffle(rng);
        let Some((f, thr, gain)) = self.best_split(&idx, &features) else {
            return id;
        };
        self.importance[f] += n / self.n_root * gain;
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x[i][f] <= thr);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id] = Node::Split { feature: f, threshold: thr, left, right };
        id
    }
}

#[allow(clippy::too_many_arguments)]
fn fit_forest(
    x: &[Vec<f64>],
    y: &[f64],
    d: usize,
    n_trees: usize,
    max_depth: Option<usize>,
    bootstrap: bool,
    max_features: MaxFeatures,
    seed: u64,
) -> Model {
    let mtry = match max_features {
        MaxFeatures::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
        MaxFeatures::All => d,
    };
    let mut trees = Vec::with_capacity(n_trees);
    let mut importances = vec![0.0; d];
    for t in 0..n_trees {
        let mut rng = rng::seeded(rng::derive(seed, t as u64));
        let idx: Vec<usize> =
            if bootstrap { (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect() } else { (0..x.len()).collect() };
        let mut b = TreeBuilder {
            x,
            y,
            d,
            mtry,
            max_depth,
            nodes: Vec::new(),
            importance: vec![0.0; d],
            n_root: idx.len() as f64,
        };
        b.build(idx, 0, &mut rng);
        let total: f64 = b.importance.iter().sum();
        if total > 0.0 {
            for (acc, v) in importances.iter_mut().zip(&b.importance) {
                *acc += v / total;
            }
        }
        trees.push(Tree { nodes: b.nodes });
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    }
    Model::Forest { trees, importances }
}

fn fit_gbm(x: &[Vec<f64>], y: &[f64], d: usize, rounds: usize, lr: f64) -> Model {
    let n = x.len() as f64;
    let p0 = (y.iter().sum::<f64>() / n).clamp(1e-6, 1.0 - 1e-6);
    let base = (p0 / (1.0 - p0)).ln();
    let mut f = vec![base; x.len()];
    let mut stumps = Vec::with_capacity(rounds);
    let mut orders: Vec<Vec<usize>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut o: Vec<usize> = (0..x.len()).collect();
        o.sort_by(|&a, &b| x[a][j].total_cmp(&x[b][j]));
        orders.push(o);
    }
    let newton = |num: f64, den: f64| if den > 1e-12 { (num / den).clamp(-10.0, 10.0) } else { 0.0 };
    for _ in 0..rounds {
        let p: Vec<f64> = f.iter().map(|&v| sigmoid(v)).collect();
        let r: Vec<f64> = y.iter().zip(&p).map(|(t, q)| t - q).collect();
        let h: Vec<f64> = p.iter().map(|q| q * (1.0 - q)).collect();
        let r_total: f64 = r.iter().sum();
        let mut best: Option<(f64, usize, f64)> = None;
        // Least-squares fit to the residuals: maximize sum_l^2/n_l + sum_r^2/n_r.
        for (j, o) in orders.iter().enumerate() {
            let mut ls = 0.0;
            for k in 0..o.len() - 1 {
                ls += r[o[k]];
                let (a, b) = (x[o[k]][j], x[o[k + 1]][j]);
                if a == b {
                    continue;
                }
                let ln = (k + 1) as f64;
                let rs = r_total - ls;
                let score = ls * ls / ln + rs * rs / (n - ln);
                if best.is_none_or(|bst| score > bst.0 + 1e-12) {
                    best = Some((score, j, 0.5 * (a + b)));
                }
            }
        }
        let stump = match best {
            Some((_, j, thr)) => {
                let (mut ln, mut ld, mut rn, mut rd) = (0.0, 0.0, 0.0, 0.0);
                for i in 0..x.len() {
                    if x[i][j] <= thr {
                        ln += r[i];
                        ld += h[i];
                    } else {
                        rn += r[i];
                        rd += h[i];
                    }
                }
                Stump { feature: j, threshold: thr, left: newton(ln, ld), right: newton(rn, rd) }
            }
            None => {
                let v = newton(r_total, h.iter().sum());
                Stump { feature: 0, threshold: f64::INFINITY, left: v, right: v }
            }
        };
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += lr * if x[i][stump.feature] <= stump.threshold { stump.left } else { stump.right };
        }
        stumps.push(stump);
    }
    Model::Gbm { base, learning_rate: lr, stumps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut r = rng::seeded(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 2 == 0;
            let off = if c { 0.7 } else { 0.3 };
            x.push(vec![off + r.gen_range(-0.15..0.15), off + r.gen_range(-0.15..0.15), r.gen_range(0.0..1.0)]);
            y.push(c);
        }
        (x, y)
    }

    fn all_specs() -> Vec<ModelSpec> {
        vec![
            ModelSpec::logistic(),
            ModelSpec::svm(),
            ModelSpec::random_forest(),
            ModelSpec::gbm(),
            ModelSpec::mlp("MLP-8h", &[8]),
        ]
    }

    #[test]
    fn every_model_separates_blobs() {
        let (x, y) = blobs(60, 1);
        let (tx, ty) = blobs(40, 2);
        for spec in all_specs() {
            let m = train(&spec, &x, &y, 7).unwrap();
            let acc = m.predict_all(&tx).iter().zip(&ty).filter(|(a, b)| a == b).count() as f64 / ty.len() as f64;
            assert!(acc >= 0.95, "{} accuracy {acc}", spec.name);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        for spec in all_specs() {
            assert!(matches!(train(&spec, &x, &[true, true], 0), Err(MlError::SingleClass)));
        }
    }

    #[test]
    fn missing_values_are_rejected() {
        let x = vec![vec![0.0], vec![f64::NAN]];
        assert!(matches!(train(&ModelSpec::logistic(), &x, &[true, false], 0), Err(MlError::Input(_))));
    }

    #[test]
    fn single_unbootstrapped_tree_memorizes() {
        let (x, y) = blobs(30, 3);
        let spec = ModelSpec {
            name: "tree".into(),
            kind: ModelKind::RandomForest { n_trees: 1, max_depth: None, bootstrap: false, max_features: MaxFeatures::All },
        };
        let m = train(&spec, &x, &y, 0).unwrap();
        assert_eq!(m.predict_all(&x), y);
    }

    #[test]
    fn forest_importance_favors_signal() {
        let (x, y) = blobs(80, 4);
        let m = train(&ModelSpec::random_forest(), &x, &y, 1).unwrap();
        let imp = m.importances().unwrap();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp[0] > imp[2] && imp[1] > imp[2], "{imp:?}");
    }

    #[test]
    fn same_seed_same_model() {
        let (x, y) = blobs(40, 5);
        for spec in all_specs() {
            let a = train(&spec, &x, &y, 9).unwrap();
            let b = train(&spec, &x, &y, 9).unwrap();
            let sa: Vec<f64> = x.iter().map(|r| a.score(r)).collect();
            let sb: Vec<f64> = x.iter().map(|r| b.score(r)).collect();
            assert_eq!(sa, sb, "{}", spec.name);
        }
    }

    #[test]
    fn spec_toml_round_trip() {
        let spec = ModelSpec::mlp("MLP-22-63h", &[22, 63]);
        let s = toml::to_string(&spec).unwrap();
        let back: ModelSpec = toml::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let terse: ModelSpec = toml::from_str("name = \"RF\"\nkind = \"random_forest\"\n").unwrap();
        assert_eq!(terse, ModelSpec::random_forest());
    }
}
