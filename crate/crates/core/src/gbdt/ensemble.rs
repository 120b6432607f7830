use super::{RegressionTree, Target};
use crate::error::{Error, Result};

/// Additive model: `base_score + sum_k tree_k(x)`, summed in tree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    base_score: f64,
    trees: Vec<RegressionTree>,
    feature_count: usize,
    target: Target,
}

impl Ensemble {
    pub fn new(
        base_score: f64,
        trees: Vec<RegressionTree>,
        feature_count: usize,
        target: Target,
    ) -> Result<Self> {
        if !base_score.is_finite() {
            return Err(Error::invalid("base score must be finite"));
        }
        if feature_count == 0 {
            return Err(Error::invalid("feature count must be positive"));
        }
        if let Some((k, f)) = trees
            .iter()
            .enumerate()
            .find_map(|(k, t)| t.max_feature().filter(|&f| f >= feature_count).map(|f| (k, f)))
        {
            return Err(Error::invalid(format!(
                "tree {k} splits on feature {f}, but the model has {feature_count} features"
            )));
        }
        Ok(Self {
            base_score,
            trees,
            feature_count,
            target,
        })
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_count {
            return Err(Error::Dimension {
                expected: self.feature_count,
                got: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + t.predict(x))
    }

    /// The model after its first `rounds` trees.
    pub fn prefix(&self, rounds: usize) -> Self {
        Self {
            trees: self.trees[..rounds.min(self.trees.len())].to_vec(),
            ..self.clone()
        }
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(|t| t.nodes().len()).sum()
    }
}
