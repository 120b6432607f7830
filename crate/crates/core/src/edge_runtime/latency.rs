use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use super::F32Model;
use crate::error::{Error, Result};

/// Per-call latency distribution in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyStats {
    pub n_inputs: usize,
    pub repetitions: usize,
    pub mean_us: f64,
    pub median_us: f64,
    pub p99_us: f64,
    pub min_us: f64,
    pub max_us: f64,
}

impl LatencyStats {
    /// Nearest-rank percentiles over raw samples in nanoseconds.
    pub fn from_samples_ns(mut samples: Vec<u64>, n_inputs: usize, repetitions: usize) -> Self {
        assert!(!samples.is_empty(), "latency stats need at least one sample");
        samples.sort_unstable();
        let rank = |p: f64| {
            let k = (p * samples.len() as f64).ceil() as usize;
            samples[k.clamp(1, samples.len()) - 1]
        };
        let us = |ns: u64| ns as f64 / 1e3;
        let mean = samples.iter().map(|&v| v as f64).sum::<f64>() / samples.len() as f64;
        Self {
            n_inputs,
            repetitions,
            mean_us: mean / 1e3,
            median_us: us(rank(0.5)),
            p99_us: us(rank(0.99)),
            min_us: us(samples[0]),
            max_us: us(samples[samples.len() - 1]),
        }
    }
}

/// Times single-sample inference, one call per input per repetition, after
/// one untimed warm-up sweep. Each timed call includes copying the input
/// into a fresh 1 x n tensor.
///
/// Runs on the calling thread.
pub fn latency_bench(model: &F32Model, inputs: &[Vec<f32>], repetitions: usize) -> Result<LatencyStats> {
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    if inputs.is_empty() {
        return Err(Error::invalid("latency bench needs at least one input"));
    }
    for x in inputs {
        model.infer(x)?;
    }

    let mut samples = Vec::with_capacity(inputs.len() * repetitions);
    for _ in 0..repetitions {
        for x in inputs {
            let start = Instant::now();
            let tensor: Vec<f32> = black_box(x).clone();
            let y = model.infer(&tensor);
            black_box(y).ok();
            samples.push(start.elapsed().as_nanos() as u64);
        }
    }
    Ok(LatencyStats::from_samples_ns(samples, inputs.len(), repetitions))
}
