//! Portable tree-ensemble artifact.
//!
//! All trees are flattened into parallel `nodes_*` arrays, following the
//! attribute layout of the `TreeEnsembleRegressor` operator: one entry per
//! node carrying its tree id, node id, split feature, mode, threshold and
//! true/false child ids. Leaf values live in `leaf_weights`, aligned with
//! the `LEAF` entries in array order. The base score is stored explicitly.
//!
//! On disk the artifact is a canonical UTF-8 JSON document (sorted keys,
//! every float written with 17 significant digits) so that the same model
//! always serializes to the same bytes. See `docs/format.md`.

mod text;
mod validate;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbdt::{Ensemble, RegressionTree, Target, TreeNode};

pub use validate::{validate, Violation};

pub const FORMAT_VERSION: u32 = 1;
pub const INPUT_NAME: &str = "float_input";
pub const OUTPUT_NAME: &str = "variable";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeMode {
    #[serde(rename = "BRANCH_LEQ")]
    BranchLeq,
    #[serde(rename = "LEAF")]
    Leaf,
}

impl NodeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeMode::BranchLeq => "BRANCH_LEQ",
            NodeMode::Leaf => "LEAF",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactMetadata {
    pub inverter_id: u8,
    pub target: Target,
    /// kW
    pub capacity: f64,
    pub training_seed: u64,
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub input_name: String,
    pub output_name: String,
    pub input_shape: [usize; 2],
    pub base_score: f64,
    pub nodes_treeids: Vec<u32>,
    pub nodes_nodeids: Vec<u32>,
    pub nodes_featureids: Vec<u32>,
    pub nodes_modes: Vec<NodeMode>,
    pub nodes_values: Vec<f64>,
    pub nodes_truenodeids: Vec<u32>,
    pub nodes_falsenodeids: Vec<u32>,
    pub leaf_weights: Vec<f64>,
    pub metadata: ArtifactMetadata,
}

impl ModelArtifact {
    pub fn node_count(&self) -> usize {
        self.nodes_nodeids.len()
    }

    pub fn tree_count(&self) -> usize {
        let mut ids = self.nodes_treeids.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    pub fn feature_count(&self) -> usize {
        self.input_shape[1]
    }

    /// Canonical text form.
    pub fn to_canonical_string(&self) -> String {
        text::write(self)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_canonical_string().into_bytes()
    }

    /// Parses without validating.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        text::parse(bytes)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&bytes)
    }

    /// Rebuilds the in-memory ensemble. Fails with the full violation list
    /// when the artifact does not validate.
    pub fn to_ensemble(&self) -> Result<Ensemble> {
        let violations = validate(self);
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }

        let mut leaf_slot = vec![usize::MAX; self.node_count()];
        let mut next_leaf = 0;
        for (i, mode) in self.nodes_modes.iter().enumerate() {
            if *mode == NodeMode::Leaf {
                leaf_slot[i] = next_leaf;
                next_leaf += 1;
            }
        }

        let mut by_tree: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &t) in self.nodes_treeids.iter().enumerate() {
            by_tree.entry(t).or_default().push(i);
        }

        let mut trees = Vec::with_capacity(by_tree.len());
        for entries in by_tree.values() {
            let position: HashMap<u32, usize> =
                entries.iter().map(|&i| (self.nodes_nodeids[i], i)).collect();
            let mut has_parent: HashMap<u32, bool> = HashMap::new();
            for &i in entries {
                if self.nodes_modes[i] == NodeMode::BranchLeq {
                    has_parent.insert(self.nodes_truenodeids[i], true);
                    has_parent.insert(self.nodes_falsenodeids[i], true);
                }
            }
            let root = *entries
                .iter()
                .find(|&&i| !has_parent.contains_key(&self.nodes_nodeids[i]))
                .expect("validated trees have a root");

            // breadth-first renumbering, root at 0
            let mut nodes: Vec<TreeNode> = Vec::with_capacity(entries.len());
            let mut queue = VecDeque::from([root]);
            while let Some(i) = queue.pop_front() {
                let node = match self.nodes_modes[i] {
                    NodeMode::Leaf => TreeNode::Leaf {
                        weight: self.leaf_weights[leaf_slot[i]],
                    },
                    NodeMode::BranchLeq => {
                        let left = nodes.len() + queue.len() + 1;
                        queue.push_back(position[&self.nodes_truenodeids[i]]);
                        queue.push_back(position[&self.nodes_falsenodeids[i]]);
                        TreeNode::Branch {
                            feature: self.nodes_featureids[i] as usize,
                            threshold: self.nodes_values[i],
                            left,
                            right: left + 1,
                        }
                    }
                };
                nodes.push(node);
            }
            trees.push(RegressionTree::from_nodes(nodes)?);
        }
        Ensemble::new(self.base_score, trees, self.feature_count(), self.metadata.target)
    }
}

/// Flattens an ensemble. Nodes are laid out tree by tree in breadth-first
/// order with per-tree node ids starting at 0.
pub fn export_model(ensemble: &Ensemble, metadata: ArtifactMetadata) -> Result<ModelArtifact> {
    if metadata.target != ensemble.target() {
        return Err(Error::invalid(format!(
            "metadata target {} does not match ensemble target {}",
            metadata.target,
            ensemble.target()
        )));
    }
    let n = ensemble.node_count();
    let mut a = ModelArtifact {
        format_version: FORMAT_VERSION,
        input_name: INPUT_NAME.into(),
        output_name: OUTPUT_NAME.into(),
        input_shape: [1, ensemble.feature_count()],
        base_score: ensemble.base_score(),
        nodes_treeids: Vec::with_capacity(n),
        nodes_nodeids: Vec::with_capacity(n),
        nodes_featureids: Vec::with_capacity(n),
        nodes_modes: Vec::with_capacity(n),
        nodes_values: Vec::with_capacity(n),
        nodes_truenodeids: Vec::with_capacity(n),
        nodes_falsenodeids: Vec::with_capacity(n),
        leaf_weights: Vec::new(),
        metadata,
    };
    let id = |v: usize| u32::try_from(v).map_err(|_| Error::invalid("model too large for u32 ids"));
    for (k, tree) in ensemble.trees().iter().enumerate() {
        for (i, node) in tree.nodes().iter().enumerate() {
            a.nodes_treeids.push(id(k)?);
            a.nodes_nodeids.push(id(i)?);
            match *node {
                TreeNode::Branch { feature, threshold, left, right } => {
                    a.nodes_featureids.push(id(feature)?);
                    a.nodes_modes.push(NodeMode::BranchLeq);
                    a.nodes_values.push(threshold);
                    a.nodes_truenodeids.push(id(left)?);
                    a.nodes_falsenodeids.push(id(right)?);
                }
                TreeNode::Leaf { weight } => {
                    a.nodes_featureids.push(0);
                    a.nodes_modes.push(NodeMode::Leaf);
                    a.nodes_values.push(0.0);
                    a.nodes_truenodeids.push(0);
                    a.nodes_falsenodeids.push(0);
                    a.leaf_weights.push(weight);
                }
            }
        }
    }
    Ok(a)
}

/// Parses, validates and rebuilds a model from artifact bytes.
pub fn import_model(bytes: &[u8]) -> Result<(Ensemble, ArtifactMetadata)> {
    let artifact = ModelArtifact::parse(bytes)?;
    let ensemble = artifact.to_ensemble()?;
    Ok((ensemble, artifact.metadata))
}

pub fn import_model_file(path: impl AsRef<Path>) -> Result<(Ensemble, ArtifactMetadata)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    import_model(&bytes)
}
