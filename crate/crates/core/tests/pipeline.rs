use aed_core::metrics::roc;
use aed_core::oneclass::classify;
use aed_core::pipeline::{score_frames, score_patches, train_sequences, train_with_report};
use aed_core::synth::generate;
use aed_core::*;

fn coherent_clip(frames: usize, seed: u64) -> SynthClip {
    generate(&SynthSpec {
        frames,
        height: 60,
        width: 80,
        particles: 12,
        anomaly_start: frames,
        anomaly_end: frames,
        seed,
        ..SynthSpec::default()
    })
    .unwrap()
}

#[test]
fn augmentation_multiplies_training_samples() {
    let clip = coherent_clip(16, 3);
    let mut cfg = PipelineConfig::default();
    cfg.kpca.q = 5;
    let (_, with) = train_with_report(&clip.frames, &cfg).unwrap();
    cfg.augment_enabled = false;
    let (_, without) = train_with_report(&clip.frames, &cfg).unwrap();
    assert_eq!(with.kept_pairs, without.kept_pairs);
    assert_eq!(without.training_samples, without.kept_pairs.len());
    assert_eq!(with.training_samples, 10 * with.kept_pairs.len());
}

#[test]
fn coherent_motion_trains_and_every_training_feature_is_normal() {
    let clip = coherent_clip(50, 11);
    let (model, report) = train_with_report(&clip.frames, &PipelineConfig::default()).unwrap();
    assert!(report.kept_pairs.len() >= 40);
    for z in model.kpca.train_features() {
        assert_eq!(classify(&model.kpca, z).unwrap().status, Status::Normal);
    }
    for &(_, s) in &report.canonical_scores {
        assert!(s <= model.threshold());
    }
}

#[test]
fn static_frames_are_skipped() {
    let clip = coherent_clip(20, 5);
    let model = train_with_report(&clip.frames, &PipelineConfig::default()).unwrap().0;
    let still = vec![clip.frames[3].clone(); 4];
    for s in score_frames(&model, &still).unwrap() {
        assert!(s.gated_out);
        assert_eq!(s.decision, Decision::Skipped);
        assert_eq!(s.score, 0.0);
    }
}

#[test]
fn scoring_rejects_wrong_frame_size() {
    let clip = coherent_clip(12, 5);
    let model = train_with_report(&clip.frames, &PipelineConfig::default()).unwrap().0;
    let other = generate(&SynthSpec { frames: 4, height: 48, width: 80, anomaly_start: 4, anomaly_end: 4, ..SynthSpec::default() }).unwrap();
    assert!(matches!(score_frames(&model, &other.frames), Err(AedError::DimensionMismatch { .. })));
    assert!(score_frames(&model, &clip.frames[..1]).is_err());
}

#[test]
fn frame_mode_model_refuses_patch_scoring() {
    let clip = coherent_clip(12, 5);
    let model = train_with_report(&clip.frames, &PipelineConfig::default()).unwrap().0;
    assert!(score_patches(&model, &clip.frames).is_err());
}

#[test]
fn multi_clip_training_matches_pair_count() {
    let a = coherent_clip(10, 1);
    let b = coherent_clip(8, 2);
    let mut cfg = PipelineConfig { augment_enabled: false, ..PipelineConfig::default() };
    cfg.kpca.q = 5;
    let (_, report) = train_sequences(&[&a.frames, &b.frames], &cfg).unwrap();
    assert_eq!(report.flow_pairs, 9 + 7);
}

#[test]
fn intruder_tiles_score_above_crowd_tiles() {
    let clip = generate(&SynthSpec {
        frames: 80,
        height: 96,
        width: 128,
        particles: 20,
        anomaly_start: 60,
        anomaly_end: 79,
        anomaly_style: AnomalyStyle::Intruder,
        seed: 21,
        ..SynthSpec::default()
    })
    .unwrap();
    let mut cfg = Preset::Ucsd.config();
    cfg.max_train_samples = 800;
    cfg.kpca.q = 400;
    let (model, _) = train_sequences(&[&clip.frames[..60]], &cfg).unwrap();
    let scored = score_patches(&model, &clip.frames[60..]).unwrap();
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for f in &scored {
        let t = (60 + f.frame_index).min(clip.frames.len() - 2);
        for tile in f.tiles.iter().filter(|t| !t.gated_out) {
            scores.push(tile.score);
            labels.push(clip.intruder_in_tile(t, (tile.row, tile.col), cfg.patch_h, cfg.patch_w));
        }
    }
    let curve = roc(&LabeledScores::new(scores, labels).unwrap()).unwrap();
    assert!(curve.auc >= 0.9, "patch auc {:.4}", curve.auc);
}
