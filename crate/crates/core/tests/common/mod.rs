#![allow(dead_code)]

use edgeboost::dataset::{clean, split, synth_generate};
use edgeboost::gbdt::{Ensemble, RegressionTree, Target, TreeNode};
use edgeboost::SplitDataset;
use rand::Rng;

/// Rated capacities (kW) of the six synthetic inverters.
pub const CAPACITIES: [f64; 6] = [10.0, 15.0, 20.0, 25.0, 30.0, 50.0];

/// Thirty days of synthetic telemetry for inverter `id` (1-based), cleaned
/// and split 8:2 with seed 42.
pub fn inverter_split(id: u8) -> SplitDataset {
    let cap = CAPACITIES[usize::from(id - 1)];
    let raw = synth_generate(30, cap, 1000 + u64::from(id))
        .unwrap()
        .with_inverter_id(id)
        .unwrap();
    split(&clean(&raw).unwrap(), 0.8, 42).unwrap()
}

pub fn labels(records: &[edgeboost::SampleRecord], target: Target) -> Vec<f64> {
    records.iter().map(|r| r.label(target)).collect()
}

/// Random tree of depth at most `max_depth`, laid out breadth-first.
pub fn random_tree<R: Rng>(rng: &mut R, max_depth: usize, n_features: usize) -> RegressionTree {
    // Grow a shape first, then number it in BFS order.
    enum Shape {
        Branch(usize, f64, Box<Shape>, Box<Shape>),
        Leaf(f64),
    }
    fn grow<R: Rng>(rng: &mut R, depth: usize, max_depth: usize, nf: usize) -> Shape {
        if depth == max_depth || rng.random_bool(0.3) {
            Shape::Leaf(rng.random_range(-5.0..5.0))
        } else {
            let f = rng.random_range(0..nf);
            let t = rng.random_range(-3.0..3.0);
            Shape::Branch(
                f,
                t,
                Box::new(grow(rng, depth + 1, max_depth, nf)),
                Box::new(grow(rng, depth + 1, max_depth, nf)),
            )
        }
    }
    let root = grow(rng, 0, max_depth, n_features);
    let mut nodes = Vec::new();
    let mut queue = std::collections::VecDeque::from([&root]);
    let mut next = 1usize;
    while let Some(s) = queue.pop_front() {
        match s {
            Shape::Leaf(w) => nodes.push(TreeNode::Leaf { weight: *w }),
            Shape::Branch(f, t, l, r) => {
                nodes.push(TreeNode::Branch { feature: *f, threshold: *t, left: next, right: next + 1 });
                next += 2;
                queue.push_back(l);
                queue.push_back(r);
            }
        }
    }
    RegressionTree::from_nodes(nodes).unwrap()
}

pub fn random_ensemble<R: Rng>(rng: &mut R, n_trees: usize, max_depth: usize) -> Ensemble {
    let trees = (0..n_trees).map(|_| random_tree(rng, max_depth, 12)).collect();
    let target = if rng.random_bool(0.5) { Target::Active } else { Target::Reactive };
    Ensemble::new(rng.random_range(-10.0..10.0), trees, 12, target).unwrap()
}
