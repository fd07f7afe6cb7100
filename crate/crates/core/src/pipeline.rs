//! End-to-end training and scoring.
//!
//! Training: consecutive-pair flow, a magnitude cap frozen from the training
//! flows, foreground gating, color encoding, optional ten-view augmentation,
//! filter-network training, feature extraction and kernel-PCA fitting.
//! Scoring replays the same steps with the frozen parameters and no
//! augmentation. Frame `t` is scored from `flow(t, t+1)`; the last frame
//! reuses the final pair.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{AedError, Result};
use crate::featnet::{extract_features, LrnParams, train_pcanet, FeatureVector, PcanetHyper, PcanetModel};
use crate::flowlab::{compute_flow, flow_to_color, magnitude_percentile, FlowField, HsParams};
use crate::image::{FlowMap, GrayFrame};
use crate::oneclass::{self, KpcaHyper, KpcaModel, Status};

/// Intermediate size every map is resized to before augmentation crops.
pub const AUGMENT_BASE: (usize, usize) = (120, 160);
/// Size of the nine augmentation crops.
pub const AUGMENT_CROP: (usize, usize) = (96, 128);
const CROP_ROWS: [usize; 3] = [0, 12, 24];
const CROP_COLS: [usize; 3] = [0, 16, 32];
pub const AUGMENT_VIEWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    /// Foreground iff flow magnitude > `diff_threshold * magnitude_cap`.
    pub diff_threshold: f64,
    pub min_blob_area: usize,
    pub min_blob_count: usize,
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams {
            diff_threshold: 0.1,
            min_blob_area: 25,
            min_blob_count: 1,
        }
    }
}

impl GateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.diff_threshold > 0.0 && self.diff_threshold < 1.0) {
            return Err(AedError::InvalidParameter(format!(
                "gate.diff_threshold must be in (0,1), got {}",
                self.diff_threshold
            )));
        }
        if self.min_blob_area == 0 {
            return Err(AedError::InvalidParameter("gate.min_blob_area must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    FrameLevel,
    PixelLevel,
}

impl EvalMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalMode::FrameLevel => "frame_level",
            EvalMode::PixelLevel => "pixel_level",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub hs: HsParams,
    pub pcanet: PcanetHyper,
    pub kpca: KpcaHyper,
    pub gate: GateParams,
    pub augment_enabled: bool,
    pub eval_mode: EvalMode,
    pub patch_h: usize,
    pub patch_w: usize,
    pub working_h: usize,
    pub working_w: usize,
    /// Training-flow magnitude percentile used as the color saturation cap.
    pub cap_percentile: f64,
    /// LRN settings kept while `pcanet.lrn` is off.
    pub lrn_params: LrnParams,
    /// Cap on training maps after gating (evenly spaced subset); 0 = no cap.
    pub max_train_samples: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            hs: HsParams::default(),
            pcanet: PcanetHyper::default(),
            kpca: KpcaHyper { sigma: 1.0, q: 25 },
            gate: GateParams::default(),
            augment_enabled: true,
            eval_mode: EvalMode::FrameLevel,
            patch_h: 12,
            patch_w: 16,
            working_h: 24,
            working_w: 32,
            cap_percentile: 0.99,
            lrn_params: LrnParams::default(),
            max_train_samples: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.hs.validate()?;
        self.pcanet.validate(3)?;
        self.kpca.validate()?;
        self.gate.validate()?;
        if self.patch_h == 0 || self.patch_w == 0 || self.working_h == 0 || self.working_w == 0 {
            return Err(AedError::InvalidParameter("patch and working sizes must be positive".into()));
        }
        if !(self.cap_percentile > 0.0 && self.cap_percentile <= 1.0) {
            return Err(AedError::InvalidParameter(format!(
                "flow.cap_percentile must be in (0,1], got {}",
                self.cap_percentile
            )));
        }
        let (h, w) = self.network_input();
        if self.pcanet.k1 > h || self.pcanet.k2 > w {
            return Err(AedError::InvalidParameter(format!(
                "filters {}x{} do not fit the {h}x{w} network input",
                self.pcanet.k1, self.pcanet.k2
            )));
        }
        Ok(())
    }

    /// Spatial size of the maps fed to the filter network.
    pub fn network_input(&self) -> (usize, usize) {
        match self.eval_mode {
            EvalMode::FrameLevel => (self.working_h, self.working_w),
            EvalMode::PixelLevel => (self.patch_h, self.patch_w),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AedModel {
    pub config: PipelineConfig,
    pub pcanet: PcanetModel,
    pub kpca: KpcaModel,
    pub flow_magnitude_cap: f64,
    /// Training frame size; scoring requires the same.
    pub frame_h: usize,
    pub frame_w: usize,
}

impl AedModel {
    pub fn threshold(&self) -> f64 {
        self.kpca.threshold()
    }

    fn check_frames(&self, frames: &[GrayFrame]) -> Result<()> {
        if frames.len() < 2 {
            return Err(AedError::InvalidParameter(format!(
                "scoring needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        for f in frames {
            if f.height() != self.frame_h || f.width() != self.frame_w {
                return Err(AedError::dims(
                    format!("{}x{} frames", self.frame_h, self.frame_w),
                    format!("{}x{} frame", f.height(), f.width()),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Normal,
    Anomaly,
    Skipped,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Normal => "normal",
            Decision::Anomaly => "anomaly",
            Decision::Skipped => "skipped",
        })
    }
}

impl std::str::FromStr for Decision {
    type Err = AedError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Decision::Normal),
            "anomaly" => Ok(Decision::Anomaly),
            "skipped" => Ok(Decision::Skipped),
            other => Err(AedError::InvalidParameter(format!("unknown decision {other:?}"))),
        }
    }
}

impl From<Status> for Decision {
    fn from(s: Status) -> Self {
        match s {
            Status::Normal => Decision::Normal,
            Status::Anomaly => Decision::Anomaly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameScore {
    pub frame_index: usize,
    /// Reconstruction error; 0 for skipped frames.
    pub score: f64,
    pub gated_out: bool,
    pub decision: Decision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileScore {
    pub row: usize,
    pub col: usize,
    pub score: f64,
    pub gated_out: bool,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchFrameScore {
    pub frame_index: usize,
    pub tiles: Vec<TileScore>,
    /// Max over scored tiles; `None` when every tile was skipped.
    pub frame_score: Option<f64>,
    pub decision: Decision,
}

impl PatchFrameScore {
    pub fn as_frame_score(&self) -> FrameScore {
        FrameScore {
            frame_index: self.frame_index,
            score: self.frame_score.unwrap_or(0.0),
            gated_out: self.frame_score.is_none(),
            decision: self.decision,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateOutcome {
    pub keep: bool,
    pub blob_count: usize,
}

/// Sizes of the 8-connected components of `mask` (row-major, `width` wide),
/// via two-pass union-find labeling.
pub fn component_areas(mask: &[bool], width: usize) -> Vec<usize> {
    let n = mask.len();
    let height = n.checked_div(width).unwrap_or(0);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            if !mask[i] {
                continue;
            }
            let mut neighbours = [usize::MAX; 4];
            if c > 0 {
                neighbours[0] = i - 1;
            }
            if r > 0 {
                neighbours[1] = i - width;
                if c > 0 {
                    neighbours[2] = i - width - 1;
                }
                if c + 1 < width {
                    neighbours[3] = i - width + 1;
                }
            }
            for nb in neighbours.into_iter().filter(|&nb| nb != usize::MAX && mask[nb]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, nb));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut areas = vec![0usize; n];
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let root = find(&mut parent, i);
        areas[root] += 1;
    }
    areas.into_iter().filter(|&a| a > 0).collect()
}

fn foreground_mask(flow: &FlowField, magnitude_cap: f64, diff_threshold: f64) -> Vec<bool> {
    let level = diff_threshold * magnitude_cap;
    flow.magnitudes().map(|m| m > level).collect()
}

/// Keeps a frame when it has at least `min_blob_count` moving blobs of
/// area `>= min_blob_area`.
pub fn foreground_gate(flow: &FlowField, magnitude_cap: f64, params: &GateParams) -> GateOutcome {
    let mask = foreground_mask(flow, magnitude_cap, params.diff_threshold);
    let blob_count = component_areas(&mask, flow.width())
        .into_iter()
        .filter(|&a| a >= params.min_blob_area)
        .count();
    GateOutcome {
        keep: blob_count >= params.min_blob_count,
        blob_count,
    }
}

/// The un-augmented view: resize to the augmentation base, then to working size.
pub fn canonical_view(map: &FlowMap, working_h: usize, working_w: usize) -> Result<FlowMap> {
    map.resize_bilinear(AUGMENT_BASE.0, AUGMENT_BASE.1)?
        .resize_bilinear(working_h, working_w)
}

/// Ten views: the canonical view followed by the nine base-map crops in
/// row-major offset order, all at working size.
pub fn augment(map: &FlowMap, working_h: usize, working_w: usize) -> Result<Vec<FlowMap>> {
    let base = map.resize_bilinear(AUGMENT_BASE.0, AUGMENT_BASE.1)?;
    let mut views = Vec::with_capacity(AUGMENT_VIEWS);
    views.push(base.resize_bilinear(working_h, working_w)?);
    for &r in &CROP_ROWS {
        for &c in &CROP_COLS {
            views.push(
                base.crop(r, c, AUGMENT_CROP.0, AUGMENT_CROP.1)?
                    .resize_bilinear(working_h, working_w)?,
            );
        }
    }
    Ok(views)
}

/// Non-overlapping tiles; trailing partial tiles are dropped. Positions are
/// tile origins `(row, col)`.
pub fn patchify(map: &FlowMap, patch_h: usize, patch_w: usize) -> Result<Vec<((usize, usize), FlowMap)>> {
    tile_origins(map.height(), map.width(), patch_h, patch_w)?
        .into_iter()
        .map(|(r, c)| Ok(((r, c), map.crop(r, c, patch_h, patch_w)?)))
        .collect()
}

pub fn tile_origins(height: usize, width: usize, patch_h: usize, patch_w: usize) -> Result<Vec<(usize, usize)>> {
    if patch_h == 0 || patch_w == 0 || patch_h > height || patch_w > width {
        return Err(AedError::InvalidParameter(format!(
            "patch {patch_h}x{patch_w} does not fit a {height}x{width} frame"
        )));
    }
    let mut out = Vec::new();
    for r in (0..=height - patch_h).step_by(patch_h) {
        for c in (0..=width - patch_w).step_by(patch_w) {
            out.push((r, c));
        }
    }
    Ok(out)
}

/// A tile takes part in training/scoring only if it has any foreground pixel.
fn tile_has_motion(flow: &FlowField, origin: (usize, usize), cfg: &PipelineConfig, cap: f64) -> Result<bool> {
    let tile = flow.crop(origin.0, origin.1, cfg.patch_h, cfg.patch_w)?;
    let level = cfg.gate.diff_threshold * cap;
    let moving = tile.magnitudes().any(|m| m > level);
    Ok(moving)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub flow_pairs: usize,
    /// Indices (into the flow pairs) that passed the gate.
    pub kept_pairs: Vec<usize>,
    pub training_samples: usize,
    pub feature_dim: usize,
    pub rank: usize,
    pub threshold: f64,
    pub flow_magnitude_cap: f64,
    /// Training score of each kept pair's canonical view (frame level only).
    pub canonical_scores: Vec<(usize, f64)>,
}

fn check_training_frames(frames: &[GrayFrame]) -> Result<()> {
    if frames.len() < 2 {
        return Err(AedError::NoTrainingData(format!(
            "training needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    let (h, w) = (frames[0].height(), frames[0].width());
    if let Some(f) = frames.iter().find(|f| f.height() != h || f.width() != w) {
        return Err(AedError::dims(format!("{h}x{w} frames"), format!("{}x{} frame", f.height(), f.width())));
    }
    Ok(())
}

fn pair_flows(frames: &[GrayFrame], hs: &HsParams) -> Result<Vec<FlowField>> {
    (0..frames.len() - 1)
        .into_par_iter()
        .map(|t| compute_flow(&frames[t], &frames[t + 1], hs))
        .collect()
}

fn magnitude_cap(flows: &[FlowField], percentile: f64) -> Result<f64> {
    let cap = magnitude_percentile(flows, percentile)?;
    if cap > f64::EPSILON {
        return Ok(cap);
    }
    let max = flows.iter().flat_map(|f| f.magnitudes()).fold(0.0, f64::max);
    if max > f64::EPSILON {
        Ok(max)
    } else {
        Err(AedError::NoTrainingData("training frames contain no motion; every frame is gated out".into()))
    }
}

pub fn train(frames: &[GrayFrame], config: &PipelineConfig) -> Result<AedModel> {
    train_with_report(frames, config).map(|(model, _)| model)
}

pub fn train_with_report(frames: &[GrayFrame], config: &PipelineConfig) -> Result<(AedModel, TrainReport)> {
    train_sequences(&[frames], config)
}

/// Evenly spaced subset of `0..n` of size `min(n, max)`; `max == 0` keeps all.
pub fn subsample_indices(n: usize, max: usize) -> Vec<usize> {
    if max == 0 || n <= max {
        return (0..n).collect();
    }
    (0..max).map(|i| i * n / max).collect()
}

/// Trains on several independent clips. Flow is never taken across clip
/// boundaries; pair indices in the report run over all clips in order.
pub fn train_sequences(clips: &[&[GrayFrame]], config: &PipelineConfig) -> Result<(AedModel, TrainReport)> {
    config.validate()?;
    if clips.is_empty() {
        return Err(AedError::NoTrainingData("no training clips".into()));
    }
    for clip in clips {
        check_training_frames(clip)?;
    }
    let (frame_h, frame_w) = (clips[0][0].height(), clips[0][0].width());
    if let Some(clip) = clips.iter().find(|c| c[0].height() != frame_h || c[0].width() != frame_w) {
        return Err(AedError::dims(
            format!("{frame_h}x{frame_w} frames"),
            format!("{}x{} frame", clip[0].height(), clip[0].width()),
        ));
    }
    if config.eval_mode == EvalMode::PixelLevel {
        tile_origins(frame_h, frame_w, config.patch_h, config.patch_w)?;
    }

    let mut flows = Vec::new();
    for clip in clips {
        flows.extend(pair_flows(clip, &config.hs)?);
    }
    let cap = magnitude_cap(&flows, config.cap_percentile)?;
    let kept: Vec<usize> = (0..flows.len())
        .filter(|&t| foreground_gate(&flows[t], cap, &config.gate).keep)
        .collect();

    // (kept pair, index of its canonical sample) and the training maps.
    let mut canonical = Vec::new();
    let maps: Vec<FlowMap> = match config.eval_mode {
        EvalMode::FrameLevel => {
            if kept.len() < 2 {
                return Err(AedError::NoTrainingData(format!(
                    "{} of {} frame pairs passed the foreground gate; need at least 2",
                    kept.len(),
                    flows.len()
                )));
            }
            let per_pair = kept
                .par_iter()
                .map(|&t| {
                    let color = flow_to_color(&flows[t], cap)?;
                    if config.augment_enabled {
                        augment(&color, config.working_h, config.working_w)
                    } else {
                        Ok(vec![canonical_view(&color, config.working_h, config.working_w)?])
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let mut maps = Vec::new();
            for (&t, views) in kept.iter().zip(per_pair) {
                canonical.push((t, maps.len()));
                maps.extend(views);
            }
            maps
        }
        EvalMode::PixelLevel => {
            let origins = tile_origins(frame_h, frame_w, config.patch_h, config.patch_w)?;
            let per_pair = kept
                .par_iter()
                .map(|&t| {
                    let color = flow_to_color(&flows[t], cap)?;
                    let mut tiles = Vec::new();
                    for &o in &origins {
                        if tile_has_motion(&flows[t], o, config, cap)? {
                            tiles.push(color.crop(o.0, o.1, config.patch_h, config.patch_w)?);
                        }
                    }
                    Ok(tiles)
                })
                .collect::<Result<Vec<_>>>()?;
            per_pair.into_iter().flatten().collect()
        }
    };
    if maps.len() < 2 {
        return Err(AedError::NoTrainingData(format!(
            "{} training maps survived gating; need at least 2",
            maps.len()
        )));
    }

    let selected = subsample_indices(maps.len(), config.max_train_samples);
    let (maps, canonical) = if selected.len() < maps.len() {
        let mut position = vec![usize::MAX; maps.len()];
        for (k, &i) in selected.iter().enumerate() {
            position[i] = k;
        }
        let canonical = canonical
            .into_iter()
            .filter(|&(_, i)| position[i] != usize::MAX)
            .map(|(t, i)| (t, position[i]))
            .collect();
        (selected.iter().map(|&i| maps[i].clone()).collect(), canonical)
    } else {
        (maps, canonical)
    };

    let pcanet = train_pcanet(&maps, &config.pcanet)?;
    let features = extract_features(&maps, &pcanet)?;
    let kpca = oneclass::fit(&features, &config.kpca)?;

    let canonical_scores = canonical
        .iter()
        .map(|&(t, i)| Ok((t, oneclass::reconstruction_error(&kpca, &features[i])?)))
        .collect::<Result<Vec<_>>>()?;
    let report = TrainReport {
        flow_pairs: flows.len(),
        kept_pairs: kept,
        training_samples: features.len(),
        feature_dim: pcanet.feature_len(),
        rank: kpca.rank(),
        threshold: kpca.threshold(),
        flow_magnitude_cap: cap,
        canonical_scores,
    };
    let model = AedModel {
        config: *config,
        pcanet,
        kpca,
        flow_magnitude_cap: cap,
        frame_h,
        frame_w,
    };
    Ok((model, report))
}

fn flow_index(frame: usize, pairs: usize) -> usize {
    frame.min(pairs - 1)
}

fn score_feature(model: &AedModel, feature: &FeatureVector) -> Result<(f64, Decision)> {
    let c = oneclass::classify(&model.kpca, feature)?;
    Ok((c.score, c.status.into()))
}

/// Scores every frame at frame level.
pub fn score_frames(model: &AedModel, frames: &[GrayFrame]) -> Result<Vec<FrameScore>> {
    if model.config.eval_mode != EvalMode::FrameLevel {
        return Err(AedError::InvalidParameter(
            "model was trained at pixel level; score it with score_patches".into(),
        ));
    }
    model.check_frames(frames)?;
    let cfg = &model.config;
    let flows = pair_flows(frames, &cfg.hs)?;
    let per_pair = flows
        .par_iter()
        .map(|flow| {
            if !foreground_gate(flow, model.flow_magnitude_cap, &cfg.gate).keep {
                return Ok(None);
            }
            let color = flow_to_color(flow, model.flow_magnitude_cap)?;
            let view = canonical_view(&color, cfg.working_h, cfg.working_w)?;
            let feature = crate::featnet::extract_feature(view.as_map(), &model.pcanet)?;
            score_feature(model, &feature).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..frames.len())
        .map(|t| match per_pair[flow_index(t, flows.len())] {
            Some((score, decision)) => FrameScore {
                frame_index: t,
                score,
                gated_out: false,
                decision,
            },
            None => FrameScore {
                frame_index: t,
                score: 0.0,
                gated_out: true,
                decision: Decision::Skipped,
            },
        })
        .collect())
}

/// Scores every frame tile by tile; the frame score is the max tile score.
pub fn score_patches(model: &AedModel, frames: &[GrayFrame]) -> Result<Vec<PatchFrameScore>> {
    if model.config.eval_mode != EvalMode::PixelLevel {
        return Err(AedError::InvalidParameter(
            "model was trained at frame level; score it with score_frames".into(),
        ));
    }
    model.check_frames(frames)?;
    let cfg = &model.config;
    let cap = model.flow_magnitude_cap;
    let origins = tile_origins(model.frame_h, model.frame_w, cfg.patch_h, cfg.patch_w)?;
    let flows = pair_flows(frames, &cfg.hs)?;
    let per_pair = flows
        .par_iter()
        .map(|flow| {
            let frame_kept = foreground_gate(flow, cap, &cfg.gate).keep;
            let color = flow_to_color(flow, cap)?;
            let mut tiles = Vec::with_capacity(origins.len());
            for &(row, col) in &origins {
                let skipped = TileScore {
                    row,
                    col,
                    score: 0.0,
                    gated_out: true,
                    decision: Decision::Skipped,
                };
                if !frame_kept || !tile_has_motion(flow, (row, col), cfg, cap)? {
                    tiles.push(skipped);
                    continue;
                }
                let tile = color.crop(row, col, cfg.patch_h, cfg.patch_w)?;
                let feature = crate::featnet::extract_feature(tile.as_map(), &model.pcanet)?;
                let (score, decision) = score_feature(model, &feature)?;
                tiles.push(TileScore {
                    row,
                    col,
                    score,
                    gated_out: false,
                    decision,
                });
            }
            Ok(tiles)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((0..frames.len())
        .map(|t| {
            let tiles = per_pair[flow_index(t, flows.len())].clone();
            let frame_score = tiles
                .iter()
                .filter(|s| !s.gated_out)
                .map(|s| s.score)
                .reduce(f64::max);
            let decision = match frame_score {
                None => Decision::Skipped,
                Some(s) if s > model.threshold() => Decision::Anomaly,
                Some(_) => Decision::Normal,
            };
            PatchFrameScore {
                frame_index: t,
                tiles,
                frame_score,
                decision,
            }
        })
        .collect())
}

pub const FRAME_CSV_HEADER: &str = "frame_index,score,threshold,decision,gated_out";
pub const PATCH_CSV_HEADER: &str = "frame_index,score,threshold,decision,gated_out,tile_row,tile_col";
/// Ground truth for tile scores; `label` is 1 for abnormal.
pub const TILE_LABEL_CSV_HEADER: &str = "frame_index,tile_row,tile_col,label";

pub fn frame_scores_csv(scores: &[FrameScore], threshold: f64) -> String {
    let mut out = format!("{FRAME_CSV_HEADER}\n");
    for s in scores {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.frame_index, s.score, threshold, s.decision, u8::from(s.gated_out)
        );
    }
    out
}

pub fn patch_scores_csv(frames: &[PatchFrameScore], threshold: f64) -> String {
    let mut out = format!("{PATCH_CSV_HEADER}\n");
    for f in frames {
        for t in &f.tiles {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                f.frame_index, t.score, threshold, t.decision, u8::from(t.gated_out), t.row, t.col
            );
        }
    }
    out
}
