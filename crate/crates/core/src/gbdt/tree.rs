use std::collections::VecDeque;

use super::split::{best_split_sorted, sort_per_feature};
use super::{leaf_weight, FeatureMatrix, GradPair, Hyperparams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    /// Route to `left` iff `x[feature] <= threshold`.
    Branch {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { weight: f64 },
}

/// A binary regression tree stored as an arena in breadth-first order, root
/// at index 0. Every child index is greater than its parent's.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<TreeNode>,
    leaf_count: usize,
}

impl RegressionTree {
    /// Checks that `nodes` form one tree rooted at 0 in which every node has
    /// exactly one parent and children sit after their parent.
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("a tree needs at least one node"));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                TreeNode::Branch { left, right, threshold, .. } => {
                    if !threshold.is_finite() {
                        return Err(Error::invalid(format!("node {i}: non-finite threshold")));
                    }
                    for c in [left, right] {
                        if c <= i || c >= nodes.len() {
                            return Err(Error::invalid(format!("node {i}: invalid child index {c}")));
                        }
                        parents[c] += 1;
                    }
                }
                TreeNode::Leaf { weight } => {
                    if !weight.is_finite() {
                        return Err(Error::invalid(format!("node {i}: non-finite leaf weight")));
                    }
                }
            }
        }
        if let Some(i) = (1..nodes.len()).find(|&i| parents[i] != 1) {
            return Err(Error::invalid(format!(
                "node {i} has {} parents, expected 1",
                parents[i]
            )));
        }
        let leaf_count = nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count();
        Ok(Self { nodes, leaf_count })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn leaf_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf { weight } => Some(*weight),
            TreeNode::Branch { .. } => None,
        })
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let TreeNode::Branch { left, right, .. } = *n {
                depth[left] = depth[i] + 1;
                depth[right] = depth[i] + 1;
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Branch { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .max()
    }

    /// Index of the leaf that `x` lands in.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Branch { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
                TreeNode::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            TreeNode::Leaf { weight } => weight,
            TreeNode::Branch { .. } => unreachable!("leaf_index always stops at a leaf"),
        }
    }
}

struct Pending {
    node: usize,
    depth: usize,
    sorted: Vec<Vec<usize>>,
}

/// Grows one tree on `sample_indices` by repeated best-split search until
/// `max_depth` or no positive-gain split. Leaves store
/// `learning_rate * -G / (H + lambda)`.
pub fn build_tree(
    sample_indices: &[usize],
    features: &FeatureMatrix,
    grads: &[GradPair],
    params: &Hyperparams,
) -> Result<RegressionTree> {
    if sample_indices.is_empty() {
        return Err(Error::invalid("cannot build a tree on zero samples"));
    }
    let mut nodes = vec![TreeNode::Leaf { weight: 0.0 }];
    let mut queue = VecDeque::from([Pending {
        node: 0,
        depth: 0,
        sorted: sort_per_feature(sample_indices, features),
    }]);

    while let Some(Pending { node, depth, sorted }) = queue.pop_front() {
        let split = if depth < params.max_depth {
            best_split_sorted(&sorted, features, grads, params)
        } else {
            None
        };
        match split {
            Some(s) => {
                let col = features.column(s.feature);
                let (left, right): (Vec<Vec<usize>>, Vec<Vec<usize>>) = sorted
                    .into_iter()
                    .map(|list| list.into_iter().partition(|&i| col[i] <= s.threshold))
                    .unzip();
                let (l, r) = (nodes.len(), nodes.len() + 1);
                nodes[node] = TreeNode::Branch {
                    feature: s.feature,
                    threshold: s.threshold,
                    left: l,
                    right: r,
                };
                nodes.push(TreeNode::Leaf { weight: 0.0 });
                nodes.push(TreeNode::Leaf { weight: 0.0 });
                queue.push_back(Pending { node: l, depth: depth + 1, sorted: left });
                queue.push_back(Pending { node: r, depth: depth + 1, sorted: right });
            }
            None => {
                let members = sorted.first().map_or(&[][..], Vec::as_slice);
                let (g, h) = members
                    .iter()
                    .fold((0.0, 0.0), |(g, h), &i| (g + grads[i].g, h + grads[i].h));
                let w = params.learning_rate * leaf_weight(g, h, params.lambda)?;
                nodes[node] = TreeNode::Leaf { weight: w };
            }
        }
    }
    RegressionTree::from_nodes(nodes)
}
