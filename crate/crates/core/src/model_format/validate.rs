use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{ModelArtifact, NodeMode, FORMAT_VERSION, INPUT_NAME, OUTPUT_NAME};

/// One broken artifact invariant. `index` is the position in the `nodes_*`
/// arrays.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnsupportedVersion { found: u32 },
    InputName { found: String },
    OutputName { found: String },
    InputShape { found: [usize; 2] },
    NonFiniteBaseScore,
    ArrayLength { field: &'static str, expected: usize, found: usize },
    LeafWeightCount { leaves: usize, weights: usize },
    NonFiniteValue { field: &'static str, index: usize },
    FeatureOutOfRange { index: usize, tree: u32, feature: u32, limit: usize },
    DuplicateNode { index: usize, tree: u32, node: u32 },
    MissingChild { index: usize, tree: u32, node: u32, child: u32 },
    MultipleParents { tree: u32, node: u32 },
    Cycle { tree: u32 },
    Root { tree: u32, roots: usize },
    Unreachable { index: usize, tree: u32, node: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            UnsupportedVersion { found } => {
                write!(f, "format_version {found} is not supported (expected {FORMAT_VERSION})")
            }
            InputName { found } => write!(f, "input_name is `{found}`, expected `{INPUT_NAME}`"),
            OutputName { found } => write!(f, "output_name is `{found}`, expected `{OUTPUT_NAME}`"),
            InputShape { found } => write!(f, "input_shape {found:?} must be [1, n] with n >= 1"),
            NonFiniteBaseScore => write!(f, "base_score is not finite"),
            ArrayLength { field, expected, found } => {
                write!(f, "{field} has {found} entries, expected {expected}")
            }
            LeafWeightCount { leaves, weights } => {
                write!(f, "{leaves} LEAF nodes but {weights} leaf_weights")
            }
            NonFiniteValue { field, index } => write!(f, "{field}[{index}] is not finite"),
            FeatureOutOfRange { index, tree, feature, limit } => write!(
                f,
                "node index {index} (tree {tree}): featureid {feature} out of range for {limit} inputs"
            ),
            DuplicateNode { index, tree, node } => {
                write!(f, "node index {index}: tree {tree} already has node id {node}")
            }
            MissingChild { index, tree, node, child } => write!(
                f,
                "node index {index} (tree {tree}, node {node}): child {child} does not exist"
            ),
            MultipleParents { tree, node } => {
                write!(f, "tree {tree}: node {node} is referenced by more than one branch")
            }
            Cycle { tree } => write!(f, "tree {tree}: child references form a cycle"),
            Root { tree, roots } => write!(f, "tree {tree}: expected exactly one root, found {roots}"),
            Unreachable { index, tree, node } => {
                write!(f, "node index {index} (tree {tree}, node {node}) is unreachable from the root")
            }
        }
    }
}

/// Checks every structural invariant and returns all violations found.
/// An empty list means the artifact routes any finite input safely.
pub fn validate(a: &ModelArtifact) -> Vec<Violation> {
    let mut out = Vec::new();
    if a.format_version != FORMAT_VERSION {
        out.push(Violation::UnsupportedVersion { found: a.format_version });
    }
    if a.input_name != INPUT_NAME {
        out.push(Violation::InputName { found: a.input_name.clone() });
    }
    if a.output_name != OUTPUT_NAME {
        out.push(Violation::OutputName { found: a.output_name.clone() });
    }
    let shape_ok = a.input_shape[0] == 1 && a.input_shape[1] >= 1;
    if !shape_ok {
        out.push(Violation::InputShape { found: a.input_shape });
    }
    if !a.base_score.is_finite() {
        out.push(Violation::NonFiniteBaseScore);
    }

    let n = a.nodes_nodeids.len();
    let lengths = [
        ("nodes_treeids", a.nodes_treeids.len()),
        ("nodes_featureids", a.nodes_featureids.len()),
        ("nodes_modes", a.nodes_modes.len()),
        ("nodes_values", a.nodes_values.len()),
        ("nodes_truenodeids", a.nodes_truenodeids.len()),
        ("nodes_falsenodeids", a.nodes_falsenodeids.len()),
    ];
    let mut lengths_ok = true;
    for (field, found) in lengths {
        if found != n {
            lengths_ok = false;
            out.push(Violation::ArrayLength { field, expected: n, found });
        }
    }

    for (i, w) in a.leaf_weights.iter().enumerate() {
        if !w.is_finite() {
            out.push(Violation::NonFiniteValue { field: "leaf_weights", index: i });
        }
    }
    // the per-node checks below index every array by node position
    if !lengths_ok {
        return out;
    }

    let leaves = a.nodes_modes.iter().filter(|m| **m == NodeMode::Leaf).count();
    if leaves != a.leaf_weights.len() {
        out.push(Violation::LeafWeightCount { leaves, weights: a.leaf_weights.len() });
    }

    for i in 0..n {
        if !a.nodes_values[i].is_finite() {
            out.push(Violation::NonFiniteValue { field: "nodes_values", index: i });
        }
        if shape_ok && a.nodes_featureids[i] as usize >= a.input_shape[1] {
            out.push(Violation::FeatureOutOfRange {
                index: i,
                tree: a.nodes_treeids[i],
                feature: a.nodes_featureids[i],
                limit: a.input_shape[1],
            });
        }
    }

    let mut by_tree: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &t) in a.nodes_treeids.iter().enumerate() {
        by_tree.entry(t).or_default().push(i);
    }
    for (&tree, entries) in &by_tree {
        check_tree(a, tree, entries, &mut out);
    }
    out
}

fn check_tree(a: &ModelArtifact, tree: u32, entries: &[usize], out: &mut Vec<Violation>) {
    let mut position: HashMap<u32, usize> = HashMap::with_capacity(entries.len());
    for &i in entries {
        let node = a.nodes_nodeids[i];
        if position.insert(node, i).is_some() {
            out.push(Violation::DuplicateNode { index: i, tree, node });
        }
    }
    let mut structural = position.len() == entries.len();

    // child adjacency by entry position
    let mut children: HashMap<usize, [usize; 2]> = HashMap::new();
    let mut parents: HashMap<usize, usize> = HashMap::new();
    for &i in entries {
        if a.nodes_modes[i] != NodeMode::BranchLeq {
            continue;
        }
        let mut pair = [usize::MAX; 2];
        for (slot, child) in [a.nodes_truenodeids[i], a.nodes_falsenodeids[i]].into_iter().enumerate() {
            match position.get(&child) {
                Some(&c) => {
                    pair[slot] = c;
                    *parents.entry(c).or_default() += 1;
                }
                None => {
                    structural = false;
                    out.push(Violation::MissingChild {
                        index: i,
                        tree,
                        node: a.nodes_nodeids[i],
                        child,
                    });
                }
            }
        }
        children.insert(i, pair);
    }

    let mut multi: Vec<u32> = parents
        .iter()
        .filter(|(_, &count)| count > 1)
        .map(|(&c, _)| a.nodes_nodeids[c])
        .collect();
    multi.sort_unstable();
    for node in multi {
        structural = false;
        out.push(Violation::MultipleParents { tree, node });
    }

    if has_cycle(entries, &children) {
        out.push(Violation::Cycle { tree });
        return;
    }
    if !structural {
        return;
    }

    let roots: Vec<usize> = entries.iter().copied().filter(|i| !parents.contains_key(i)).collect();
    if roots.len() != 1 {
        out.push(Violation::Root { tree, roots: roots.len() });
        return;
    }
    let mut seen: HashMap<usize, ()> = HashMap::new();
    let mut stack = vec![roots[0]];
    while let Some(i) = stack.pop() {
        seen.insert(i, ());
        if let Some(pair) = children.get(&i) {
            stack.extend(pair.iter().copied().filter(|&c| c != usize::MAX));
        }
    }
    for &i in entries {
        if !seen.contains_key(&i) {
            out.push(Violation::Unreachable { index: i, tree, node: a.nodes_nodeids[i] });
        }
    }
}

/// Iterative three-colour DFS over the child graph.
fn has_cycle(entries: &[usize], children: &HashMap<usize, [usize; 2]>) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut mark: HashMap<usize, Mark> = HashMap::new();
    for &start in entries {
        if mark.contains_key(&start) {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark.insert(start, Mark::Open);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let kids = children.get(&node).copied().unwrap_or([usize::MAX; 2]);
            if *next < 2 {
                let c = kids[*next];
                *next += 1;
                if c == usize::MAX {
                    continue;
                }
                match mark.get(&c) {
                    Some(Mark::Open) => return true,
                    Some(Mark::Done) => {}
                    None => {
                        mark.insert(c, Mark::Open);
                        stack.push((c, 0));
                    }
                }
            } else {
                mark.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    false
}
