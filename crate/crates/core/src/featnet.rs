//! Two-stage PCA filter network.
//!
//! Stage one learns `l1` filters from mean-removed patches of the input
//! maps, stage two learns `l2` single-channel filters from patches of every
//! stage-one response. Stage-two responses are binarized with a strict
//! Heaviside step, packed into integer codes and summarized by
//! non-overlapping block histograms.
//!
//! Patches are vectorized channel-major, then row-major inside a channel;
//! filters use the same layout. Convolution is cross-correlation with zero
//! padding, so every response keeps the input's spatial size.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{AedError, Result};
use crate::image::{FlowMap, GrayFrame, Map};

/// Largest supported `l2`; histograms have `2^l2` bins per block.
pub const MAX_L2: usize = 16;

/// Cross-map divisive normalization applied after each stage's convolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrnParams {
    pub bias: f64,
    pub weight: f64,
    /// Neighbourhood width across maps; `depth / 2` maps on each side.
    pub depth: usize,
    pub exponent: f64,
}

impl Default for LrnParams {
    fn default() -> Self {
        LrnParams {
            bias: 2.0,
            weight: 1e-4,
            depth: 5,
            exponent: 0.75,
        }
    }
}

impl LrnParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.bias, self.weight, self.exponent].iter().all(|v| v.is_finite());
        if !finite || self.bias < 0.0 || self.weight < 0.0 || self.bias + self.weight <= 0.0 {
            return Err(AedError::InvalidParameter(format!(
                "lrn needs finite bias, weight >= 0 with bias + weight > 0, got bias={} weight={}",
                self.bias, self.weight
            )));
        }
        if self.depth == 0 {
            return Err(AedError::InvalidParameter("lrn.depth must be >= 1".into()));
        }
        if self.exponent.is_nan() || self.exponent <= 0.0 {
            return Err(AedError::InvalidParameter(format!(
                "lrn.exponent must be > 0, got {}",
                self.exponent
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcanetHyper {
    pub k1: usize,
    pub k2: usize,
    pub l1: usize,
    pub l2: usize,
    pub block_h: usize,
    pub block_w: usize,
    pub lrn: Option<LrnParams>,
}

impl Default for PcanetHyper {
    fn default() -> Self {
        PcanetHyper {
            k1: 3,
            k2: 3,
            l1: 8,
            l2: 8,
            block_h: 8,
            block_w: 8,
            lrn: None,
        }
    }
}

impl PcanetHyper {
    /// Checks the hyperparameters against an input with `channels` channels.
    pub fn validate(&self, channels: usize) -> Result<()> {
        let bad = |msg: String| Err(AedError::InvalidParameter(msg));
        if self.k1 == 0 || self.k2 == 0 || self.k1.is_multiple_of(2) || self.k2.is_multiple_of(2) {
            return bad(format!("filter size must be odd and positive, got {}x{}", self.k1, self.k2));
        }
        if self.l1 == 0 || self.l2 == 0 {
            return bad("l1 and l2 must be >= 1".into());
        }
        if self.l1 > self.k1 * self.k2 * channels {
            return bad(format!(
                "l1={} exceeds stage-one patch dimension {}",
                self.l1,
                self.k1 * self.k2 * channels
            ));
        }
        if self.l2 > self.k1 * self.k2 {
            return bad(format!("l2={} exceeds stage-two patch dimension {}", self.l2, self.k1 * self.k2));
        }
        if self.l2 > MAX_L2 {
            return bad(format!("l2={} exceeds the supported maximum {MAX_L2}", self.l2));
        }
        if self.block_h == 0 || self.block_w == 0 {
            return bad("block size must be positive".into());
        }
        if let Some(lrn) = &self.lrn {
            lrn.validate()?;
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        1 << self.l2
    }

    pub fn block_count(&self, height: usize, width: usize) -> usize {
        height.div_ceil(self.block_h) * width.div_ceil(self.block_w)
    }

    pub fn feature_len(&self, height: usize, width: usize) -> usize {
        self.bins() * self.l1 * self.block_count(height, width)
    }
}

/// Patch vectors stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PatchMatrix {
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            if col.len() != rows {
                return Err(AedError::dims(format!("{rows} rows"), format!("{} rows", col.len())));
            }
            data.extend_from_slice(col);
        }
        Ok(PatchMatrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows.max(1))
    }

    /// `S * S^T`.
    pub fn scatter(&self) -> DMatrix<f64> {
        let mut acc = vec![0.0; self.rows * self.rows];
        for col in self.columns() {
            add_outer(&mut acc, col);
        }
        scatter_matrix(self.rows, &acc)
    }
}

/// Learned convolution kernels for one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub(crate) stage: u8,
    pub(crate) k1: usize,
    pub(crate) k2: usize,
    pub(crate) channels: usize,
    pub(crate) filters: Vec<Vec<f64>>,
    pub(crate) eigenvalues: Vec<f64>,
}

impl FilterBank {
    pub fn stage(&self) -> u8 {
        self.stage
    }

    pub fn kernel_size(&self) -> (usize, usize) {
        (self.k1, self.k2)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    /// Vectorized filters, same layout as patch columns.
    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Filter `index` at `(channel, row, col)`.
    pub fn weight(&self, index: usize, channel: usize, row: usize, col: usize) -> f64 {
        self.filters[index][(channel * self.k1 + row) * self.k2 + col]
    }
}

/// Integer code image with values in `[0, 2^bits - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedMap {
    height: usize,
    width: usize,
    bits: usize,
    values: Vec<u32>,
}

impl EncodedMap {
    pub fn new(height: usize, width: usize, bits: usize, values: Vec<u32>) -> Result<Self> {
        if values.len() != height * width {
            return Err(AedError::dims(height * width, values.len()));
        }
        if bits == 0 || bits > MAX_L2 {
            return Err(AedError::InvalidParameter(format!("code width {bits} outside 1..={MAX_L2}")));
        }
        if let Some(v) = values.iter().find(|&&v| v >= (1 << bits)) {
            return Err(AedError::InvalidParameter(format!("code {v} does not fit in {bits} bits")));
        }
        Ok(EncodedMap {
            height,
            width,
            bits,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn at(&self, row: usize, col: usize) -> u32 {
        self.values[row * self.width + col]
    }
}

/// Concatenated normalized block histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(AedError::InvalidParameter("feature vector must be non-empty".into()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(AedError::NonFinite("feature vector"));
        }
        Ok(FeatureVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcanetModel {
    pub(crate) hyper: PcanetHyper,
    pub(crate) input_h: usize,
    pub(crate) input_w: usize,
    pub(crate) channels: usize,
    pub(crate) bank1: FilterBank,
    pub(crate) bank2: FilterBank,
}

impl PcanetModel {
    pub fn hyper(&self) -> &PcanetHyper {
        &self.hyper
    }

    pub fn bank1(&self) -> &FilterBank {
        &self.bank1
    }

    pub fn bank2(&self) -> &FilterBank {
        &self.bank2
    }

    /// `(height, width, channels)` of the maps the model was trained on.
    pub fn input_shape(&self) -> (usize, usize, usize) {
        (self.input_h, self.input_w, self.channels)
    }

    pub fn feature_len(&self) -> usize {
        self.hyper.feature_len(self.input_h, self.input_w)
    }
}

impl AsRef<Map> for Map {
    fn as_ref(&self) -> &Map {
        self
    }
}

impl AsRef<Map> for FlowMap {
    fn as_ref(&self) -> &Map {
        self.as_map()
    }
}

impl AsRef<Map> for GrayFrame {
    fn as_ref(&self) -> &Map {
        self.as_map()
    }
}

/// Dense stride-1 patches without padding, one column per top-left corner
/// in row-major order.
pub fn extract_patches(map: &Map, k1: usize, k2: usize) -> Result<PatchMatrix> {
    let (h, w, c) = map.shape();
    if k1 == 0 || k2 == 0 || k1 > h || k2 > w {
        return Err(AedError::InvalidParameter(format!(
            "patch {k1}x{k2} does not fit in a {h}x{w} map"
        )));
    }
    let rows = k1 * k2 * c;
    let cols = (h - k1 + 1) * (w - k2 + 1);
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..=h - k1 {
        for x in 0..=w - k2 {
            push_patch(map, r, x, k1, k2, &mut data);
        }
    }
    Ok(PatchMatrix { rows, cols, data })
}

#[inline]
fn push_patch(map: &Map, r: usize, x: usize, k1: usize, k2: usize, out: &mut Vec<f64>) {
    let w = map.width();
    for ch in 0..map.channels() {
        let plane = map.plane(ch);
        for dr in 0..k1 {
            let start = (r + dr) * w + x;
            out.extend_from_slice(&plane[start..start + k2]);
        }
    }
}

/// Subtracts each column's own mean from that column.
pub fn remove_patch_mean(mut patches: PatchMatrix) -> Result<PatchMatrix> {
    if patches.rows == 0 || patches.cols == 0 {
        return Err(AedError::InvalidParameter("empty patch matrix".into()));
    }
    let rows = patches.rows;
    for col in patches.data.chunks_exact_mut(rows) {
        center_in_place(col);
    }
    Ok(patches)
}

#[inline]
fn center_in_place(col: &mut [f64]) {
    let mean = col.iter().sum::<f64>() / col.len() as f64;
    for v in col {
        *v -= mean;
    }
}

/// Adds `x x^T` to the upper triangle of a row-major `d x d` accumulator.
#[inline]
fn add_outer(acc: &mut [f64], x: &[f64]) {
    let d = x.len();
    for a in 0..d {
        let xa = x[a];
        if xa == 0.0 {
            continue;
        }
        let row = &mut acc[a * d..(a + 1) * d];
        for b in a..d {
            row[b] += xa * x[b];
        }
    }
}

fn scatter_matrix(d: usize, upper: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |a, b| if a <= b { upper[a * d + b] } else { upper[b * d + a] })
}

/// Principal eigenvectors of `S S^T`, reshaped into filters.
///
/// `patches` must already be mean-removed. Each filter's largest-magnitude
/// entry is made positive.
pub fn learn_filters(patches: &PatchMatrix, count: usize, k1: usize, k2: usize, channels: usize) -> Result<FilterBank> {
    if patches.rows != k1 * k2 * channels {
        return Err(AedError::dims(
            format!("{} patch rows for {k1}x{k2}x{channels}", k1 * k2 * channels),
            patches.rows,
        ));
    }
    filters_from_scatter(patches.scatter(), patches.cols, count, k1, k2, channels, 1)
}

fn filters_from_scatter(
    scatter: DMatrix<f64>,
    samples: usize,
    count: usize,
    k1: usize,
    k2: usize,
    channels: usize,
    stage: u8,
) -> Result<FilterBank> {
    let d = scatter.nrows();
    if count == 0 || count > d {
        return Err(AedError::InvalidParameter(format!(
            "cannot extract {count} filters from {d}-dimensional patches"
        )));
    }
    let trace = scatter.trace();
    if !trace.is_finite() {
        return Err(AedError::NonFinite("patch scatter matrix"));
    }
    // Mean square patch entry at or below round-off of a constant input.
    if samples == 0 || trace <= 1e-20 * (samples * d) as f64 {
        return Err(AedError::DegenerateInput(format!(
            "stage-{stage} patches have zero covariance (constant input maps)"
        )));
    }
    let eig = SymmetricEigen::try_new(scatter, f64::EPSILON, 0)
        .ok_or_else(|| AedError::EigenSolver(format!("stage-{stage} patch covariance did not converge")))?;
    let order = descending_order(eig.eigenvalues.as_slice());
    let mut filters = Vec::with_capacity(count);
    let mut eigenvalues = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let mut f: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        fix_sign(&mut f);
        filters.push(f);
        eigenvalues.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(FilterBank {
        stage,
        k1,
        k2,
        channels,
        filters,
        eigenvalues,
    })
}

/// Indices sorting `values` in descending order, ties by index.
pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn correlate(map: &Map, bank: &FilterBank, index: usize) -> Map {
    let (h, w, channels) = map.shape();
    let (k1, k2) = (bank.k1, bank.k2);
    let (pr, pc) = (k1 / 2, k2 / 2);
    let mut out = Map::zeros(h, w, 1);
    let dst = out.plane_mut(0);
    for ch in 0..channels {
        let src = map.plane(ch);
        for dr in 0..k1 {
            for dc in 0..k2 {
                let wgt = bank.weight(index, ch, dr, dc);
                // Output rows r with 0 <= r + dr - pr < h.
                let r_lo = pr.saturating_sub(dr);
                let r_hi = (h + pr).saturating_sub(dr).min(h);
                let c_lo = pc.saturating_sub(dc);
                let c_hi = (w + pc).saturating_sub(dc).min(w);
                for r in r_lo..r_hi {
                    let sr = r + dr - pr;
                    let src_row = &src[sr * w..(sr + 1) * w];
                    let dst_row = &mut dst[r * w..(r + 1) * w];
                    for c in c_lo..c_hi {
                        dst_row[c] += wgt * src_row[c + dc - pc];
                    }
                }
            }
        }
    }
    out
}

/// Correlates every map with every filter. Output `i * L + l` is input `i`
/// under filter `l`.
pub fn convolve_bank(maps: &[Map], bank: &FilterBank) -> Result<Vec<Map>> {
    let mut out = Vec::with_capacity(maps.len() * bank.len());
    for map in maps {
        if map.channels() != bank.channels {
            return Err(AedError::dims(
                format!("{} channels", bank.channels),
                format!("{} channels", map.channels()),
            ));
        }
        for l in 0..bank.len() {
            out.push(correlate(map, bank, l));
        }
    }
    Ok(out)
}

/// Local response normalization across an ordered group of single-channel maps.
pub fn lrn_normalize(maps: &[Map], params: &LrnParams) -> Result<Vec<Map>> {
    params.validate()?;
    let Some(first) = maps.first() else {
        return Ok(Vec::new());
    };
    let shape = first.shape();
    if shape.2 != 1 {
        return Err(AedError::dims("1 channel", format!("{} channels", shape.2)));
    }
    if let Some(bad) = maps.iter().find(|m| m.shape() != shape) {
        return Err(AedError::dims(format!("{shape:?}"), format!("{:?}", bad.shape())));
    }
    let count = maps.len();
    let half = params.depth / 2;
    let pixels = shape.0 * shape.1;
    let mut out: Vec<Map> = maps.iter().map(|m| Map::zeros(m.height(), m.width(), 1)).collect();
    for i in 0..count {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(count - 1);
        let mut energy = vec![0.0; pixels];
        for m in &maps[lo..=hi] {
            for (e, p) in energy.iter_mut().zip(m.plane(0)) {
                *e += p * p;
            }
        }
        let src = maps[i].plane(0);
        let dst = out[i].plane_mut(0);
        for k in 0..pixels {
            dst[k] = src[k] / (params.bias + params.weight * energy[k]).powf(params.exponent);
        }
    }
    Ok(out)
}

/// Packs `L2` responses into codes `sum_m 2^(m-1) H(O_m)`, `H(x) = [x > 0]`.
pub fn binarize_encode(outputs: &[Map], l2: usize) -> Result<EncodedMap> {
    if outputs.len() != l2 {
        return Err(AedError::dims(format!("{l2} stage-two maps"), format!("{} maps", outputs.len())));
    }
    if l2 == 0 || l2 > MAX_L2 {
        return Err(AedError::InvalidParameter(format!("l2={l2} outside 1..={MAX_L2}")));
    }
    let (h, w, _) = outputs[0].shape();
    if let Some(bad) = outputs.iter().find(|m| m.height() != h || m.width() != w || m.channels() != 1) {
        return Err(AedError::dims(format!("{h}x{w}x1"), format!("{:?}", bad.shape())));
    }
    let mut values = vec![0u32; h * w];
    for (m, out) in outputs.iter().enumerate() {
        let bit = 1u32 << m;
        for (code, &x) in values.iter_mut().zip(out.plane(0)) {
            if x > 0.0 {
                *code |= bit;
            }
        }
    }
    Ok(EncodedMap {
        height: h,
        width: w,
        bits: l2,
        values,
    })
}

/// Raw per-block code counts, blocks in row-major order. Trailing partial
/// blocks are kept.
pub fn block_counts(encoded: &EncodedMap, block_h: usize, block_w: usize) -> Vec<u64> {
    let bins = 1usize << encoded.bits;
    let (h, w) = (encoded.height, encoded.width);
    let (br, bc) = (h.div_ceil(block_h), w.div_ceil(block_w));
    let mut counts = vec![0u64; br * bc * bins];
    for r in 0..h {
        let block_row = r / block_h;
        for c in 0..w {
            let block = block_row * bc + c / block_w;
            counts[block * bins + encoded.values[r * w + c] as usize] += 1;
        }
    }
    counts
}

/// Block histograms, each normalized by its own block's pixel count.
pub fn block_histogram(encoded: &EncodedMap, hyper: &PcanetHyper) -> Vec<f64> {
    let bins = 1usize << encoded.bits;
    let (h, w) = (encoded.height, encoded.width);
    let bc = w.div_ceil(hyper.block_w);
    block_counts(encoded, hyper.block_h, hyper.block_w)
        .chunks_exact(bins)
        .enumerate()
        .flat_map(|(block, counts)| {
            let (r0, c0) = ((block / bc) * hyper.block_h, (block % bc) * hyper.block_w);
            let pixels = ((h - r0).min(hyper.block_h) * (w - c0).min(hyper.block_w)) as f64;
            counts.iter().map(move |&n| n as f64 / pixels)
        })
        .collect()
}

fn stage_one(map: &Map, model_hyper: &PcanetHyper, bank1: &FilterBank) -> Result<Vec<Map>> {
    let responses = convolve_bank(std::slice::from_ref(map), bank1)?;
    match &model_hyper.lrn {
        Some(lrn) => lrn_normalize(&responses, lrn),
        None => Ok(responses),
    }
}

fn stage_two(response: &Map, model_hyper: &PcanetHyper, bank2: &FilterBank) -> Result<Vec<Map>> {
    let outputs = convolve_bank(std::slice::from_ref(response), bank2)?;
    match &model_hyper.lrn {
        Some(lrn) => lrn_normalize(&outputs, lrn),
        None => Ok(outputs),
    }
}

fn check_same_shape<M: AsRef<Map>>(maps: &[M]) -> Result<(usize, usize, usize)> {
    let first = maps
        .first()
        .ok_or_else(|| AedError::NoTrainingData("no maps to train the filter network on".into()))?
        .as_ref()
        .shape();
    for m in maps {
        if m.as_ref().shape() != first {
            return Err(AedError::dims(format!("{first:?}"), format!("{:?}", m.as_ref().shape())));
        }
    }
    Ok(first)
}

/// Sum of `x x^T` over mean-removed patches of `map`, upper triangle.
fn map_scatter(map: &Map, k1: usize, k2: usize) -> Vec<f64> {
    let (h, w, c) = map.shape();
    let d = k1 * k2 * c;
    let mut acc = vec![0.0; d * d];
    let mut patch = Vec::with_capacity(d);
    for r in 0..=h - k1 {
        for x in 0..=w - k2 {
            patch.clear();
            push_patch(map, r, x, k1, k2, &mut patch);
            center_in_place(&mut patch);
            add_outer(&mut acc, &patch);
        }
    }
    acc
}

fn sum_partials(d: usize, partials: Vec<Vec<f64>>) -> DMatrix<f64> {
    let mut total = vec![0.0; d * d];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    scatter_matrix(d, &total)
}

/// Learns both filter banks from `maps`.
pub fn train_pcanet<M: AsRef<Map> + Sync>(maps: &[M], hyper: &PcanetHyper) -> Result<PcanetModel> {
    let (h, w, channels) = check_same_shape(maps)?;
    hyper.validate(channels)?;
    if hyper.k1 > h || hyper.k2 > w {
        return Err(AedError::InvalidParameter(format!(
            "filter {}x{} larger than {h}x{w} input",
            hyper.k1, hyper.k2
        )));
    }
    let (k1, k2) = (hyper.k1, hyper.k2);
    let per_map = (h - k1 + 1) * (w - k2 + 1);

    let d1 = k1 * k2 * channels;
    let partials: Vec<Vec<f64>> = maps.par_iter().map(|m| map_scatter(m.as_ref(), k1, k2)).collect();
    let bank1 = filters_from_scatter(sum_partials(d1, partials), per_map * maps.len(), hyper.l1, k1, k2, channels, 1)?;

    let d2 = k1 * k2;
    let partials = maps
        .par_iter()
        .map(|m| {
            let responses = stage_one(m.as_ref(), hyper, &bank1)?;
            let mut acc = vec![0.0; d2 * d2];
            for resp in &responses {
                for (a, v) in acc.iter_mut().zip(map_scatter(resp, k1, k2)) {
                    *a += v;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = per_map * maps.len() * hyper.l1;
    let bank2 = filters_from_scatter(sum_partials(d2, partials), samples, hyper.l2, k1, k2, 1, 2)?;

    Ok(PcanetModel {
        hyper: *hyper,
        input_h: h,
        input_w: w,
        channels,
        bank1,
        bank2,
    })
}

/// The `L1` code maps of one input (forward pass up to binarization).
pub fn encode_maps(map: &Map, model: &PcanetModel) -> Result<Vec<EncodedMap>> {
    if map.shape() != model.input_shape() {
        return Err(AedError::dims(format!("{:?}", model.input_shape()), format!("{:?}", map.shape())));
    }
    stage_one(map, &model.hyper, &model.bank1)?
        .iter()
        .map(|resp| binarize_encode(&stage_two(resp, &model.hyper, &model.bank2)?, model.hyper.l2))
        .collect()
}

/// Full forward pass: length `2^l2 * l1 * B`.
pub fn extract_feature(map: &Map, model: &PcanetModel) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(model.feature_len());
    for encoded in encode_maps(map, model)? {
        values.extend(block_histogram(&encoded, &model.hyper));
    }
    FeatureVector::new(values)
}

/// Features for many maps, computed in parallel, returned in input order.
pub fn extract_features<M: AsRef<Map> + Sync>(maps: &[M], model: &PcanetModel) -> Result<Vec<FeatureVector>> {
    maps.par_iter().map(|m| extract_feature(m.as_ref(), model)).collect()
}
