//! Gradient-boosted regression trees that turn PV inverter telemetry into
//! active/reactive power setpoints, a portable tree-ensemble exchange format,
//! and a float32 inference path for edge devices.
//!
//! The pipeline is `dataset` (ingest, clean, split, synthesize) → `gbdt`
//! (second-order boosting) → `model_format` (flattened parallel-array
//! artifact) → `edge_runtime` (float32 lowering, parity, latency). `metrics`
//! and `baselines` provide the evaluation side.

pub mod baselines;
pub mod dataset;
pub mod edge_runtime;
pub mod error;
pub mod gbdt;
pub mod metrics;
pub mod model_format;

pub use baselines::LinearModel;
pub use dataset::{InverterDataset, SampleRecord, SplitDataset, FEATURE_COUNT, FEATURE_NAMES};
pub use edge_runtime::{F32Model, LatencyStats, ParityReport};
pub use error::{Error, Result};
pub use gbdt::{Ensemble, GradPair, Hyperparams, RegressionTree, Target};
pub use metrics::MetricReport;
pub use model_format::{ArtifactMetadata, ModelArtifact, Violation};
