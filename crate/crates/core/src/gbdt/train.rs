use super::{build_tree, compute_gradients, Ensemble, FeatureMatrix, Hyperparams, Target};
use crate::dataset::SplitDataset;
use crate::error::{Error, Result};

/// Fits an ensemble on the training half of `split` for the chosen target.
pub fn train(split: &SplitDataset, target: Target, params: &Hyperparams) -> Result<Ensemble> {
    if split.train.is_empty() {
        return Err(Error::EmptyDataset {
            stage: "split (training set)",
            count: 0,
        });
    }
    let features = FeatureMatrix::from_records(&split.train);
    let labels: Vec<f64> = split.train.iter().map(|r| r.label(target)).collect();
    train_on_matrix(&features, &labels, target, params)
}

/// Boosting loop: start from the label mean, then for each round compute
/// gradients at the running predictions, grow a tree and add its output.
pub fn train_on_matrix(
    features: &FeatureMatrix,
    labels: &[f64],
    target: Target,
    params: &Hyperparams,
) -> Result<Ensemble> {
    params.validate()?;
    let n = labels.len();
    if n == 0 {
        return Err(Error::EmptyDataset {
            stage: "training",
            count: 0,
        });
    }
    if features.n_rows() != n {
        return Err(Error::invalid(format!(
            "{} feature rows but {n} labels",
            features.n_rows()
        )));
    }
    if labels.iter().any(|y| !y.is_finite()) {
        return Err(Error::invalid("training labels must be finite"));
    }

    let base_score = labels.iter().sum::<f64>() / n as f64;
    let all: Vec<usize> = (0..n).collect();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| features.row(i)).collect();
    let mut predictions = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.num_trees);

    for _ in 0..params.num_trees {
        let grads = compute_gradients(labels, &predictions)?;
        let tree = build_tree(&all, features, &grads, params)?;
        for (p, row) in predictions.iter_mut().zip(&rows) {
            *p += tree.predict(row);
        }
        trees.push(tree);
    }
    Ensemble::new(base_score, trees, features.n_cols(), target)
}
