//! Linear feature reduction: Fisher LDA and PCA.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::MlError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Reduction {
    Lda {
        #[serde(default)]
        shrinkage: Shrinkage,
    },
    Pca { components: usize },
}

/// Regularization of the within-class scatter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shrinkage {
    /// Plain `Sw`, with a tiny ridge only if it is singular.
    #[default]
    None,
    /// Ledoit-Wolf shrinkage towards a scaled identity.
    LedoitWolf,
}

impl Reduction {
    pub fn label(&self) -> &'static str {
        match self {
            Reduction::Lda { .. } => "LDA",
            Reduction::Pca { .. } => "PCA",
        }
    }

    pub fn fit(&self, x: &[Vec<f64>], y: &[bool]) -> Result<Projection, MlError> {
        match self {
            Reduction::Lda { shrinkage: Shrinkage::None } => Ok(Projection::Lda(Lda::fit(x, y)?)),
            Reduction::Lda { shrinkage: Shrinkage::LedoitWolf } => Ok(Projection::Lda(Lda::fit_shrunk(x, y)?)),
            Reduction::Pca { components } => Ok(Projection::Pca(Pca::fit(x, *components)?)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Projection {
    Lda(Lda),
    Pca(Pca),
}

impl Projection {
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        match self {
            Projection::Lda(l) => vec![l.project(row)],
            Projection::Pca(p) => p.transform_row(row),
        }
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

fn to_matrix(x: &[Vec<f64>]) -> Result<DMatrix<f64>, MlError> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    if n == 0 || d == 0 {
        return Err(MlError::Input("empty matrix".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(MlError::Input("matrix has a missing or non-finite value".into()));
    }
    Ok(DMatrix::from_fn(n, d, |i, j| x[i][j]))
}

/// Two-class Fisher discriminant. `direction` is `Sw^-1 (mu1 - mu0)`
/// normalized to unit length, signed so the positive class projects higher.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lda {
    pub direction: Vec<f64>,
    /// Ridge added to the within-class scatter; 0 when it was well posed.
    pub ridge: f64,
    /// Ledoit-Wolf intensity in `[0, 1]`; 0 for the plain fit.
    pub shrinkage: f64,
}

/// Ledoit-Wolf intensity for the covariance of the rows of `z`, which are
/// already centered.
fn ledoit_wolf(z: &DMatrix<f64>) -> f64 {
    let (n, d) = (z.nrows() as f64, z.ncols() as f64);
    let z2 = z.map(|v| v * v);
    let var_sum: f64 = z2.sum() / n;
    let mu = var_sum / d;
    let beta_raw: f64 = (z2.transpose() * &z2).sum();
    let delta_raw: f64 = (z.transpose() * z).map(|v| v * v).sum() / (n * n);
    let beta = (beta_raw / n - delta_raw) / (d * n);
    let delta = (delta_raw - 2.0 * mu * var_sum + d * mu * mu) / d;
    let beta = beta.min(delta);
    if beta <= 0.0 || delta <= 0.0 {
        0.0
    } else {
        beta / delta
    }
}

impl Lda {
    pub fn fit(x: &[Vec<f64>], y: &[bool]) -> Result<Lda, MlError> {
        Self::fit_with(x, y, Shrinkage::None)
    }

    /// Fits with the within-class scatter shrunk towards `mu * I`.
    pub fn fit_shrunk(x: &[Vec<f64>], y: &[bool]) -> Result<Lda, MlError> {
        Self::fit_with(x, y, Shrinkage::LedoitWolf)
    }

    fn fit_with(x: &[Vec<f64>], y: &[bool], mode: Shrinkage) -> Result<Lda, MlError> {
        let m = to_matrix(x)?;
        if y.len() != x.len() {
            return Err(MlError::Input(format!("{} rows vs {} labels", x.len(), y.len())));
        }
        let d = m.ncols();
        let mut mu = [DVector::zeros(d), DVector::zeros(d)];
        let mut count = [0usize; 2];
        for (i, &t) in y.iter().enumerate() {
            mu[usize::from(t)] += m.row(i).transpose();
            count[usize::from(t)] += 1;
        }
        if count[0] == 0 || count[1] == 0 {
            return Err(MlError::SingleClass);
        }
        for c in 0..2 {
            mu[c] /= count[c] as f64;
        }
        let centered = DMatrix::from_fn(m.nrows(), d, |i, j| m[(i, j)] - mu[usize::from(y[i])][j]);
        let mut sw = centered.transpose() * &centered;
        let mut shrinkage = 0.0;
        if mode == Shrinkage::LedoitWolf {
            shrinkage = ledoit_wolf(&centered);
            let target = sw.trace() / d as f64;
            sw *= 1.0 - shrinkage;
            for k in 0..d {
                sw[(k, k)] += shrinkage * target;
            }
        }
        let diff = &mu[1] - &mu[0];
        let eig = SymmetricEigen::new(sw.clone());
        let max_ev = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
        let min_ev = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut ridge = 0.0;
        if max_ev <= 0.0 || min_ev <= max_ev * 1e-12 {
            let trace = sw.trace();
            ridge = 1e-6 * if trace > 0.0 { trace / d as f64 } else { 1.0 };
            for k in 0..d {
                sw[(k, k)] += ridge;
            }
        }
        let w = sw
            .cholesky()
            .ok_or_else(|| MlError::Numeric("within-class scatter is not positive definite".into()))?
            .solve(&diff);
        let norm = w.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(MlError::Numeric("class means coincide; no discriminant direction".into()));
        }
        let mut direction: Vec<f64> = (w / norm).iter().cloned().collect();
        if direction.iter().zip(diff.iter()).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            direction.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(Lda { direction, ridge, shrinkage })
    }

    pub fn project(&self, row: &[f64]) -> f64 {
        self.direction.iter().zip(row).map(|(a, b)| a * b).sum()
    }
}

/// Principal components of the sample covariance, by decreasing variance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// One unit-length component per entry; the largest-magnitude
    /// coordinate of each is positive.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl Pca {
    /// Keeps the top `k` components. Needs at least two rows.
    pub fn fit(x: &[Vec<f64>], k: usize) -> Result<Pca, MlError> {
        let m = to_matrix(x)?;
        let (n, d) = (m.nrows(), m.ncols());
        if k == 0 || k > d {
            return Err(MlError::Input(format!("pca components {k} outside 1..={d}")));
        }
        if n < 2 {
            return Err(MlError::Input("pca needs at least two rows".into()));
        }
        let mean: Vec<f64> = (0..d).map(|j| m.column(j).mean()).collect();
        let centered = DMatrix::from_fn(n, d, |i, j| m[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / (n - 1) as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let keep = k;
        let mut components = Vec::with_capacity(keep);
        let mut eigenvalues = Vec::with_capacity(keep);
        for &c in order.iter().take(keep) {
            let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().cloned().collect();
            let lead = v.iter().cloned().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                v.iter_mut().for_each(|e| *e = -*e);
            }
            components.push(v);
            eigenvalues.push(eig.eigenvalues[c].max(0.0));
        }
        Ok(Pca { mean, components, eigenvalues })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((w, v), m)| w * (v - m)).sum())
            .collect()
    }
}
