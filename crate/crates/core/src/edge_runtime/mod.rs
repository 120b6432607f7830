//! Float32 execution path that stands in for an edge device, plus the
//! tooling to compare it with the full-precision model and to time it.
//!
//! Lowering rounds every threshold, leaf weight and the base score to the
//! nearest float32 and keeps the tree topology untouched, so a lowered model
//! routes exactly like the original except for inputs within one float32 ULP
//! of a threshold.

mod latency;
mod parity;

use crate::error::{Error, Result};
use crate::gbdt::{Ensemble, TreeNode};
use crate::model_format::ModelArtifact;

pub use latency::{latency_bench, LatencyStats};
pub use parity::{
    display_agreement, format_significant, parity_report, parity_report_with_eps, ParityReport,
    DEFAULT_PARITY_EPS,
};

#[derive(Debug, Clone, Copy, PartialEq)]
enum F32Node {
    Branch {
        feature: u32,
        threshold: f32,
        left: u32,
        right: u32,
    },
    Leaf(f32),
}

/// Ensemble with all scalars stored as float32.
#[derive(Debug, Clone, PartialEq)]
pub struct F32Model {
    base_score: f32,
    trees: Vec<Vec<F32Node>>,
    feature_count: usize,
}

fn to_f32(v: f64, what: &str) -> Result<f32> {
    let r = v as f32;
    if !r.is_finite() {
        return Err(Error::Lowering(format!("{what} {v} is outside the float32 range")));
    }
    Ok(r)
}

/// Validates the artifact and rounds every scalar to the nearest float32.
pub fn lower_to_f32(artifact: &ModelArtifact) -> Result<F32Model> {
    F32Model::from_ensemble(&artifact.to_ensemble()?)
}

/// Runs one input through the float32 model.
pub fn infer_f32(model: &F32Model, input: &[f32]) -> Result<f32> {
    model.infer(input)
}

impl F32Model {
    pub fn from_ensemble(ensemble: &Ensemble) -> Result<Self> {
        let base_score = to_f32(ensemble.base_score(), "base score")?;
        let trees = ensemble
            .trees()
            .iter()
            .map(|t| {
                t.nodes()
                    .iter()
                    .map(|n| {
                        Ok(match *n {
                            TreeNode::Branch { feature, threshold, left, right } => F32Node::Branch {
                                feature: feature as u32,
                                threshold: to_f32(threshold, "threshold")?,
                                left: left as u32,
                                right: right as u32,
                            },
                            TreeNode::Leaf { weight } => F32Node::Leaf(to_f32(weight, "leaf weight")?),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            base_score,
            trees,
            feature_count: ensemble.feature_count(),
        })
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn base_score(&self) -> f32 {
        self.base_score
    }

    /// Every stored leaf weight, tree by tree in node order.
    pub fn leaf_weights(&self) -> impl Iterator<Item = f32> + '_ {
        self.trees.iter().flatten().filter_map(|n| match n {
            F32Node::Leaf(w) => Some(*w),
            F32Node::Branch { .. } => None,
        })
    }

    /// Every stored threshold, tree by tree in node order.
    pub fn thresholds(&self) -> impl Iterator<Item = f32> + '_ {
        self.trees.iter().flatten().filter_map(|n| match n {
            F32Node::Branch { threshold, .. } => Some(*threshold),
            F32Node::Leaf(_) => None,
        })
    }

    /// Rejects anything but exactly `feature_count` finite values.
    pub fn infer(&self, input: &[f32]) -> Result<f32> {
        if input.len() != self.feature_count {
            return Err(Error::Dimension {
                expected: self.feature_count,
                got: input.len(),
            });
        }
        if let Some(i) = input.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("input element {i} is not finite")));
        }
        Ok(self
            .trees
            .iter()
            .fold(self.base_score, |acc, t| acc + t[leaf_of(t, input)].leaf_value()))
    }

    /// Leaf index reached in each tree.
    pub fn leaf_path(&self, input: &[f32]) -> Result<Vec<usize>> {
        if input.len() != self.feature_count {
            return Err(Error::Dimension {
                expected: self.feature_count,
                got: input.len(),
            });
        }
        Ok(self.trees.iter().map(|t| leaf_of(t, input)).collect())
    }
}

impl F32Node {
    fn leaf_value(&self) -> f32 {
        match self {
            F32Node::Leaf(w) => *w,
            F32Node::Branch { .. } => unreachable!("routing ends at a leaf"),
        }
    }
}

fn leaf_of(tree: &[F32Node], x: &[f32]) -> usize {
    let mut i = 0usize;
    loop {
        match tree[i] {
            F32Node::Branch { feature, threshold, left, right } => {
                i = if x[feature as usize] <= threshold { left } else { right } as usize;
            }
            F32Node::Leaf(_) => return i,
        }
    }
}
