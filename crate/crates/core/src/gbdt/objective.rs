use super::{Ensemble, FeatureMatrix, Hyperparams};
use crate::dataset::SampleRecord;
use crate::error::{Error, Result};

/// First and second derivative of the loss at the current prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradPair {
    pub g: f64,
    pub h: f64,
}

/// Gradients of `l(y, p) = (y - p)^2 / 2`: `g = p - y`, `h = 1`.
pub fn compute_gradients(labels: &[f64], predictions: &[f64]) -> Result<Vec<GradPair>> {
    if labels.len() != predictions.len() {
        return Err(Error::invalid(format!(
            "labels ({}) and predictions ({}) differ in length",
            labels.len(),
            predictions.len()
        )));
    }
    labels
        .iter()
        .zip(predictions)
        .map(|(&y, &p)| {
            if !(y.is_finite() && p.is_finite()) {
                return Err(Error::invalid("labels and predictions must be finite"));
            }
            Ok(GradPair { g: p - y, h: 1.0 })
        })
        .collect()
}

/// Optimal leaf value `-G / (H + lambda)`.
pub fn leaf_weight(grad_sum: f64, hess_sum: f64, lambda: f64) -> Result<f64> {
    let denom = hess_sum + lambda;
    if !(denom > 0.0) {
        return Err(Error::DegenerateLeaf {
            hessian: hess_sum,
            lambda,
        });
    }
    Ok(-grad_sum / denom)
}

/// Objective reduction from splitting a node into (L, R), minus `gamma`.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> Result<f64> {
    let score = |g: f64, h: f64| -> Result<f64> {
        let denom = h + lambda;
        if !(denom > 0.0) {
            return Err(Error::DegenerateLeaf { hessian: h, lambda });
        }
        Ok(g * g / denom)
    };
    let parent = score(gl + gr, hl + hr)?;
    Ok(0.5 * (score(gl, hl)? + score(gr, hr)? - parent) - gamma)
}

/// Training objective: squared loss over `data` plus `gamma * T + lambda/2 * |w|^2`
/// summed over every tree, using the stored (shrunk) leaf weights.
pub fn objective_value(ensemble: &Ensemble, data: &[SampleRecord], params: &Hyperparams) -> f64 {
    let loss: f64 = data
        .iter()
        .map(|r| {
            let y = r.label(ensemble.target());
            let p = ensemble.predict_unchecked(&r.features);
            0.5 * (y - p) * (y - p)
        })
        .sum();
    loss + regularization(ensemble, params)
}

/// [`objective_value`] over a feature matrix and label vector.
pub fn objective_on(
    ensemble: &Ensemble,
    features: &FeatureMatrix,
    labels: &[f64],
    params: &Hyperparams,
) -> Result<f64> {
    if features.n_rows() != labels.len() {
        return Err(Error::invalid("feature rows and labels differ in length"));
    }
    let mut row = vec![0.0; features.n_cols()];
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = features.get(i, j);
        }
        let p = ensemble.predict(&row)?;
        loss += 0.5 * (y - p) * (y - p);
    }
    Ok(loss + regularization(ensemble, params))
}

fn regularization(ensemble: &Ensemble, params: &Hyperparams) -> f64 {
    ensemble
        .trees()
        .iter()
        .map(|t| {
            let sq: f64 = t.leaf_weights().map(|w| w * w).sum();
            params.gamma * t.leaf_count() as f64 + 0.5 * params.lambda * sq
        })
        .sum()
}
