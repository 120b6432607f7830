use rayon::prelude::*;

use super::{split_gain, FeatureMatrix, GradPair, Hyperparams};

/// Below this many samples per node the feature scan stays on one thread.
const PARALLEL_MIN_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Gains closer than this share of the node's score scale count as tied;
/// far above accumulated rounding, far below any meaningful difference.
pub(crate) const TIE_TOLERANCE: f64 = 1e-12;

/// Whether `gain` beats `best` by more than a rounding-level tie.
pub(crate) fn beats(gain: f64, best: f64, scale: f64) -> bool {
    gain > best + TIE_TOLERANCE * (scale + best.abs())
}

/// Threshold between two consecutive distinct sorted values, such that
/// `lo <= t < hi`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = 0.5 * lo + 0.5 * hi;
    if m >= hi || m < lo {
        lo
    } else {
        m
    }
}

/// Exact greedy search over every feature and every midpoint between
/// consecutive distinct values among `sample_indices`.
///
/// Returns the best candidate when its gain is strictly positive and both
/// children meet `min_child_weight`. Ties, within a rounding-level tolerance
/// of the node score, go to the lower feature index,
/// then to the lower threshold.
pub fn find_best_split(
    sample_indices: &[usize],
    features: &FeatureMatrix,
    grads: &[GradPair],
    params: &Hyperparams,
) -> Option<SplitCandidate> {
    if sample_indices.len() < 2 {
        return None;
    }
    let sorted = sort_per_feature(sample_indices, features);
    best_split_sorted(&sorted, features, grads, params)
}

pub(crate) fn sort_per_feature(sample_indices: &[usize], features: &FeatureMatrix) -> Vec<Vec<usize>> {
    let mut base = sample_indices.to_vec();
    base.sort_unstable();
    (0..features.n_cols())
        .map(|j| {
            let col = features.column(j);
            let mut idx = base.clone();
            idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            idx
        })
        .collect()
}

/// Same search as [`find_best_split`], over per-feature index lists that are
/// already sorted by feature value.
pub(crate) fn best_split_sorted(
    sorted: &[Vec<usize>],
    features: &FeatureMatrix,
    grads: &[GradPair],
    params: &Hyperparams,
) -> Option<SplitCandidate> {
    let first = sorted.first()?;
    let n = first.len();
    if n < 2 {
        return None;
    }
    let (g_total, h_total) = first
        .iter()
        .fold((0.0, 0.0), |(g, h), &i| (g + grads[i].g, h + grads[i].h));

    let denom = h_total + params.lambda;
    let scale = 1.0 + if denom > 0.0 { g_total * g_total / denom } else { 0.0 };
    let scan = |j: usize| scan_feature(j, &sorted[j], features.column(j), grads, g_total, h_total, scale, params);
    let per_feature: Vec<Option<SplitCandidate>> = if n >= PARALLEL_MIN_SAMPLES {
        (0..sorted.len()).into_par_iter().map(scan).collect()
    } else {
        (0..sorted.len()).map(scan).collect()
    };

    // feature order is fixed here, so the result does not depend on scheduling
    let mut best: Option<SplitCandidate> = None;
    for cand in per_feature.into_iter().flatten() {
        if best.is_none_or(|b| beats(cand.gain, b.gain, scale)) {
            best = Some(cand);
        }
    }
    best.filter(|b| b.gain > 0.0)
}

fn scan_feature(
    feature: usize,
    order: &[usize],
    column: &[f64],
    grads: &[GradPair],
    g_total: f64,
    h_total: f64,
    scale: f64,
    params: &Hyperparams,
) -> Option<SplitCandidate> {
    let mut best: Option<SplitCandidate> = None;
    let (mut gl, mut hl) = (0.0, 0.0);
    for w in order.windows(2) {
        let (i, next) = (w[0], w[1]);
        gl += grads[i].g;
        hl += grads[i].h;
        let (lo, hi) = (column[i], column[next]);
        if lo == hi {
            continue;
        }
        let (gr, hr) = (g_total - gl, h_total - hl);
        if hl < params.min_child_weight || hr < params.min_child_weight {
            continue;
        }
        let Ok(gain) = split_gain(gl, hl, gr, hr, params.lambda, params.gamma) else {
            continue;
        };
        if best.is_none_or(|b| beats(gain, b.gain, scale)) {
            best = Some(SplitCandidate {
                feature,
                threshold: midpoint(lo, hi),
                gain,
            });
        }
    }
    best
}
