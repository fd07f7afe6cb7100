//! Deterministic inputs shared by the benchmarks.

use aed_core::flowlab::{compute_flow, flow_to_color};
use aed_core::synth::generate;
use aed_core::{FlowMap, GrayFrame, HsParams, LabeledScores, SynthSpec};

/// A short coherent-crowd clip at the given size.
pub fn clip(frames: usize, height: usize, width: usize) -> Vec<GrayFrame> {
    generate(&SynthSpec {
        frames,
        height,
        width,
        anomaly_start: frames,
        anomaly_end: frames,
        seed: 11,
        ..SynthSpec::default()
    })
    .expect("valid synth spec")
    .frames
}

/// Color-coded flow maps for consecutive pairs, resized to `h`x`w`.
pub fn flow_maps(frames: &[GrayFrame], h: usize, w: usize) -> Vec<FlowMap> {
    frames
        .windows(2)
        .map(|p| {
            let flow = compute_flow(&p[0], &p[1], &HsParams::default()).expect("same-size frames");
            flow_to_color(&flow, 1.0).and_then(|m| m.resize_bilinear(h, w)).expect("non-empty map")
        })
        .collect()
}

/// `n` scores with a shifted positive class and a few ties.
pub fn labeled_scores(n: usize) -> LabeledScores {
    let scores = (0..n).map(|i| ((i * 7919) % 1000) as f64 / 10.0 + if i % 3 == 0 { 20.0 } else { 0.0 }).collect();
    let labels = (0..n).map(|i| i % 3 == 0).collect();
    LabeledScores::new(scores, labels).expect("both classes present")
}
