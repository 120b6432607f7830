//! Second-order gradient boosting of regression trees.
//!
//! Each round fits a tree to the gradient statistics of the current
//! predictions under squared loss. Leaf weights are the closed-form optimum
//! `-G / (H + lambda)` scaled by the learning rate, and splits are chosen by
//! exact greedy search over midpoints of consecutive distinct values.

mod ensemble;
mod matrix;
mod objective;
mod split;
mod train;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ensemble::Ensemble;
pub use matrix::FeatureMatrix;
pub use objective::{
    compute_gradients, leaf_weight, objective_on, objective_value, split_gain, GradPair,
};
pub use split::{find_best_split, SplitCandidate};
pub use train::{train, train_on_matrix};
pub use tree::{build_tree, RegressionTree, TreeNode};

/// Which power quantity a model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Active,
    Reactive,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Active => "active",
            Target::Reactive => "reactive",
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "active" | "p" => Ok(Target::Active),
            "reactive" | "q" => Ok(Target::Reactive),
            other => Err(Error::invalid(format!(
                "unknown target `{other}` (expected active or reactive)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub num_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            num_trees: 100,
            max_depth: 6,
            learning_rate: 0.3,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            seed: 42,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(Error::invalid("num_trees must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("min_child_weight", self.min_child_weight),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}
