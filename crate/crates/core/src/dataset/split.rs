use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{InverterDataset, SampleRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Vec<SampleRecord>,
    pub test: Vec<SampleRecord>,
    pub seed: u64,
    pub train_fraction: f64,
    pub inverter_id: u8,
    pub capacity: f64,
}

/// Seeded random partition: the first `floor(train_fraction * n)` records of
/// a Fisher-Yates permutation go to `train`, the rest to `test`.
pub fn split(dataset: &InverterDataset, train_fraction: f64, seed: u64) -> Result<SplitDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = dataset.len();
    if n == 0 {
        return Err(Error::EmptyDataset {
            stage: "split",
            count: 0,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (train_fraction * n as f64).floor() as usize;

    let records = dataset.records();
    let (train_idx, test_idx) = order.split_at(n_train);
    Ok(SplitDataset {
        train: train_idx.iter().map(|&i| records[i].clone()).collect(),
        test: test_idx.iter().map(|&i| records[i].clone()).collect(),
        seed,
        train_fraction,
        inverter_id: dataset.inverter_id(),
        capacity: dataset.capacity(),
    })
}
