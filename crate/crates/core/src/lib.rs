//! Video anomaly detection from optical-flow color maps.
//!
//! Frames go through Horn-Schunck flow ([`flowlab`]), a two-stage PCA
//! filter network with binary hashing and block histograms ([`featnet`]),
//! and a Gaussian kernel-PCA one-class model ([`oneclass`]). [`pipeline`]
//! wires them together; [`metrics`] computes ROC, AUC and EER.

pub mod config;
pub mod container;
pub mod error;
pub mod featnet;
pub mod flowlab;
pub mod image;
pub mod metrics;
pub mod oneclass;
pub mod pipeline;
pub mod synth;

pub use config::Preset;
pub use error::{AedError, Result};
pub use featnet::{FeatureVector, FilterBank, LrnParams, PcanetHyper, PcanetModel};
pub use flowlab::{FlowField, HsParams};
pub use image::{FlowMap, GrayFrame, Map};
pub use metrics::{LabeledScores, RocCurve, RocPoint};
pub use oneclass::{Classification, KpcaHyper, KpcaModel, Status};
pub use pipeline::{
    AedModel, Decision, EvalMode, FrameScore, GateParams, PatchFrameScore, PipelineConfig, TileScore, TrainReport,
};
pub use synth::{AnomalyStyle, SynthClip, SynthSpec};
