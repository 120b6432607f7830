//! Ordinary least squares baseline.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gbdt::FeatureMatrix;

pub const DEFAULT_RIDGE_EPS: f64 = 1e-8;

/// A pivot below this fraction of its original diagonal entry marks the
/// Gram matrix as singular.
const SINGULAR_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Dimension {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercept)
    }
}

pub fn predict_linear(model: &LinearModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Least squares via the normal equations on centered data. A singular Gram
/// matrix is retried once with `ridge_eps` added to its diagonal.
pub fn fit_ols(features: &FeatureMatrix, labels: &[f64], ridge_eps: f64) -> Result<LinearModel> {
    let (n, d) = (features.n_rows(), features.n_cols());
    if n != labels.len() {
        return Err(Error::invalid(format!("{n} feature rows but {} labels", labels.len())));
    }
    if n == 0 {
        return Err(Error::EmptyDataset { stage: "ols fit", count: 0 });
    }
    if !(ridge_eps.is_finite() && ridge_eps >= 0.0) {
        return Err(Error::invalid(format!("ridge_eps must be >= 0, got {ridge_eps}")));
    }

    let y_mean = labels.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = (0..d)
        .map(|j| features.column(j).iter().sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|j| features.column(j).iter().map(|v| v - means[j]).collect())
        .collect();
    let yc: Vec<f64> = labels.iter().map(|v| v - y_mean).collect();

    let mut gram = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            let s: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
            gram[a][b] = s;
            gram[b][a] = s;
        }
    }
    let rhs: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().zip(&yc).map(|(x, y)| x * y).sum())
        .collect();

    let weights = match cholesky_solve(&gram, &rhs, 0.0, SINGULAR_RATIO) {
        Some(w) => w,
        None => cholesky_solve(&gram, &rhs, ridge_eps, 0.0).ok_or_else(|| {
            Error::Numerical(format!(
                "normal equations are singular even with ridge {ridge_eps}"
            ))
        })?,
    };
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numerical("least squares produced non-finite weights".into()));
    }
    let intercept = y_mean - weights.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel { weights, intercept })
}

/// Solves `(A + ridge I) x = b` for symmetric `A`. Returns `None` when a
/// pivot falls to `ratio` times its diagonal entry or below.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64], ridge: f64, ratio: f64) -> Option<Vec<f64>> {
    let d = b.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i][j] + if i == j { ridge } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                let diag = a[i][i] + ridge;
                if !(s > ratio * diag) || !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut z = vec![0.0; d];
    for i in 0..d {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    Some(x)
}
