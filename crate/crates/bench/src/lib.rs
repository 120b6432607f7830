//! Shared fixtures for the criterion benchmarks.

use edgeboost::dataset::{clean, split, synth_generate};
use edgeboost::gbdt::{train, Hyperparams, Target};
use edgeboost::{Ensemble, SplitDataset};

/// Thirty synthetic days for a 10 kW inverter, split 8:2 with seed 42.
pub fn fixture_split() -> SplitDataset {
    let raw = synth_generate(30, 10.0, 7).expect("generator accepts 30 days");
    split(&clean(&raw).expect("synthetic data is clean"), 0.8, 42).expect("valid fraction")
}

/// Default-sized model (100 trees, depth 6) on [`fixture_split`].
pub fn fixture_model(split: &SplitDataset, target: Target) -> Ensemble {
    train(split, target, &Hyperparams::default()).expect("training succeeds")
}

/// Test rows as float32 inputs.
pub fn f32_inputs(split: &SplitDataset) -> Vec<Vec<f32>> {
    split.test.iter().map(|r| r.features.iter().map(|&v| v as f32).collect()).collect()
}
