//! Dense Horn-Schunck optical flow and its color-wheel rendering.
//!
//! Derivatives use the original first-difference cube over a 2x2x2
//! neighbourhood (rows `r, r+1`, columns `c, c+1`, both frames), with the
//! last row/column replicated at the border. The iteration is the classical
//! Jacobi scheme over the weighted 8-neighbour average (1/6 for edge
//! neighbours, 1/12 for diagonals).

use crate::error::{AedError, Result};
use crate::image::{FlowMap, GrayFrame, Map};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsParams {
    /// Smoothness weight; the energy uses `alpha^2`.
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop once the mean absolute update of `(u, v)` drops below this.
    pub tol: f64,
}

impl Default for HsParams {
    fn default() -> Self {
        HsParams {
            alpha: 1.0,
            max_iters: 200,
            tol: 1e-4,
        }
    }
}

impl HsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(AedError::InvalidParameter(format!("hs.alpha must be > 0, got {}", self.alpha)));
        }
        if self.max_iters == 0 {
            return Err(AedError::InvalidParameter("hs.max_iters must be >= 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(AedError::InvalidParameter(format!("hs.tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Per-pixel displacement in pixels/frame; `u` along columns, `v` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    height: usize,
    width: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FlowField {
    pub fn new(height: usize, width: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = height * width;
        if n == 0 || u.len() != n || v.len() != n {
            return Err(AedError::dims(
                format!("{n} entries per component"),
                format!("u: {}, v: {}", u.len(), v.len()),
            ));
        }
        if !u.iter().chain(&v).all(|x| x.is_finite()) {
            return Err(AedError::NonFinite("flow field"));
        }
        Ok(FlowField { height, width, u, v })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        FlowField {
            height,
            width,
            u: vec![0.0; height * width],
            v: vec![0.0; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.u.iter().zip(&self.v).map(|(u, v)| u.hypot(*v))
    }

    pub fn mean_u(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }

    pub fn mean_v(&self) -> f64 {
        self.v.iter().sum::<f64>() / self.v.len() as f64
    }

    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<FlowField> {
        if height == 0 || width == 0 || row + height > self.height || col + width > self.width {
            return Err(AedError::InvalidParameter(format!(
                "crop {height}x{width} at ({row},{col}) outside {}x{} flow field",
                self.height, self.width
            )));
        }
        let mut u = Vec::with_capacity(height * width);
        let mut v = Vec::with_capacity(height * width);
        for r in row..row + height {
            let start = r * self.width + col;
            u.extend_from_slice(&self.u[start..start + width]);
            v.extend_from_slice(&self.v[start..start + width]);
        }
        Ok(FlowField { height, width, u, v })
    }
}

struct Derivatives {
    ix: Vec<f64>,
    iy: Vec<f64>,
    it: Vec<f64>,
}

fn cube_derivatives(prev: &GrayFrame, next: &GrayFrame) -> Derivatives {
    let (h, w) = (prev.height(), prev.width());
    let mut d = Derivatives {
        ix: vec![0.0; h * w],
        iy: vec![0.0; h * w],
        it: vec![0.0; h * w],
    };
    for r in 0..h {
        let r1 = (r + 1).min(h - 1);
        for c in 0..w {
            let c1 = (c + 1).min(w - 1);
            let (a00, a01, a10, a11) = (prev.at(r, c), prev.at(r, c1), prev.at(r1, c), prev.at(r1, c1));
            let (b00, b01, b10, b11) = (next.at(r, c), next.at(r, c1), next.at(r1, c), next.at(r1, c1));
            let i = r * w + c;
            d.ix[i] = 0.25 * ((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10));
            d.iy[i] = 0.25 * ((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01));
            d.it[i] = 0.25 * ((b00 - a00) + (b01 - a01) + (b10 - a10) + (b11 - a11));
        }
    }
    d
}

#[inline]
fn neighbour_average(field: &[f64], h: usize, w: usize, r: usize, c: usize) -> f64 {
    let up = r.saturating_sub(1);
    let down = (r + 1).min(h - 1);
    let left = c.saturating_sub(1);
    let right = (c + 1).min(w - 1);
    let at = |rr: usize, cc: usize| field[rr * w + cc];
    (at(up, c) + at(down, c) + at(r, left) + at(r, right)) / 6.0
        + (at(up, left) + at(up, right) + at(down, left) + at(down, right)) / 12.0
}

/// Horn-Schunck flow from `prev` to `next`.
pub fn compute_flow(prev: &GrayFrame, next: &GrayFrame, params: &HsParams) -> Result<FlowField> {
    params.validate()?;
    if prev.height() != next.height() || prev.width() != next.width() {
        return Err(AedError::dims(
            format!("{}x{}", prev.height(), prev.width()),
            format!("{}x{}", next.height(), next.width()),
        ));
    }
    let (h, w) = (prev.height(), prev.width());
    let d = cube_derivatives(prev, next);
    let alpha2 = params.alpha * params.alpha;

    let mut u = vec![0.0; h * w];
    let mut v = vec![0.0; h * w];
    let mut u_next = vec![0.0; h * w];
    let mut v_next = vec![0.0; h * w];
    for _ in 0..params.max_iters {
        let mut change = 0.0;
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                let ub = neighbour_average(&u, h, w, r, c);
                let vb = neighbour_average(&v, h, w, r, c);
                let (ix, iy, it) = (d.ix[i], d.iy[i], d.it[i]);
                let common = (ix * ub + iy * vb + it) / (alpha2 + ix * ix + iy * iy);
                u_next[i] = ub - ix * common;
                v_next[i] = vb - iy * common;
                change += (u_next[i] - u[i]).abs() + (v_next[i] - v[i]).abs();
            }
        }
        std::mem::swap(&mut u, &mut u_next);
        std::mem::swap(&mut v, &mut v_next);
        if change / ((2 * h * w) as f64) < params.tol {
            break;
        }
    }
    FlowField::new(h, w, u, v)
}

/// Segment lengths of the standard 55-colour flow wheel:
/// red-yellow, yellow-green, green-cyan, cyan-blue, blue-magenta, magenta-red.
const WHEEL_SEGMENTS: [usize; 6] = [15, 6, 4, 11, 13, 6];
pub const WHEEL_SIZE: usize = 55;

/// The 55-entry colour wheel in `[0,1]` RGB. Entry 0 is pure red.
pub fn color_wheel() -> [[f64; 3]; WHEEL_SIZE] {
    let mut wheel = [[0.0; 3]; WHEEL_SIZE];
    let mut k = 0;
    for (seg, &len) in WHEEL_SEGMENTS.iter().enumerate() {
        for i in 0..len {
            let t = i as f64 / len as f64;
            wheel[k] = match seg {
                0 => [1.0, t, 0.0],
                1 => [1.0 - t, 1.0, 0.0],
                2 => [0.0, 1.0, t],
                3 => [0.0, 1.0 - t, 1.0],
                4 => [t, 0.0, 1.0],
                _ => [1.0, 0.0, 1.0 - t],
            };
            k += 1;
        }
    }
    wheel
}

/// Colour for one flow vector. Direction angle `atan2(v, u)` selects the
/// hue (angle 0 = wheel entry 0, counter-clockwise in `(u, v)` coordinates),
/// magnitude / cap (clamped to 1) blends from white toward that hue.
pub fn encode_vector(u: f64, v: f64, magnitude_cap: f64, wheel: &[[f64; 3]; WHEEL_SIZE]) -> [f64; 3] {
    let radius = (u.hypot(v) / magnitude_cap).min(1.0);
    if radius == 0.0 {
        return [1.0; 3];
    }
    let turn = v.atan2(u) / std::f64::consts::TAU;
    let turn = if turn < 0.0 { turn + 1.0 } else { turn };
    let pos = turn * WHEEL_SIZE as f64;
    let base = pos.floor();
    let frac = pos - base;
    let k0 = (base as usize) % WHEEL_SIZE;
    let k1 = (k0 + 1) % WHEEL_SIZE;
    let mut out = [0.0; 3];
    for ch in 0..3 {
        let hue = (1.0 - frac) * wheel[k0][ch] + frac * wheel[k1][ch];
        out[ch] = (1.0 - radius * (1.0 - hue)).clamp(0.0, 1.0);
    }
    out
}

/// Renders a flow field as an RGB motion image.
pub fn flow_to_color(field: &FlowField, magnitude_cap: f64) -> Result<FlowMap> {
    if !(magnitude_cap > 0.0 && magnitude_cap.is_finite()) {
        return Err(AedError::InvalidParameter(format!(
            "magnitude cap must be positive and finite, got {magnitude_cap}"
        )));
    }
    if !field.u.iter().chain(&field.v).all(|x| x.is_finite()) {
        return Err(AedError::NonFinite("flow field"));
    }
    let wheel = color_wheel();
    let (h, w) = (field.height, field.width);
    let mut map = Map::zeros(h, w, 3);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let rgb = encode_vector(field.u[i], field.v[i], magnitude_cap, &wheel);
            for (ch, value) in rgb.into_iter().enumerate() {
                map.set(r, c, ch, value);
            }
        }
    }
    Ok(FlowMap::from_map_unchecked(map))
}

/// Images that can be bilinearly resampled without leaving their type.
pub trait Resample: Sized {
    fn resample(&self, out_h: usize, out_w: usize) -> Result<Self>;
}

impl Resample for GrayFrame {
    fn resample(&self, out_h: usize, out_w: usize) -> Result<Self> {
        self.resize_bilinear(out_h, out_w)
    }
}

impl Resample for FlowMap {
    fn resample(&self, out_h: usize, out_w: usize) -> Result<Self> {
        self.resize_bilinear(out_h, out_w)
    }
}

impl Resample for Map {
    fn resample(&self, out_h: usize, out_w: usize) -> Result<Self> {
        Map::resize_bilinear(self, out_h, out_w)
    }
}

pub fn resize_bilinear<I: Resample>(image: &I, out_h: usize, out_w: usize) -> Result<I> {
    image.resample(out_h, out_w)
}

/// Nearest-rank percentile (`fraction` in `(0,1]`) of all flow magnitudes.
pub fn magnitude_percentile<'a>(fields: impl IntoIterator<Item = &'a FlowField>, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(AedError::InvalidParameter(format!(
            "percentile fraction must be in (0,1], got {fraction}"
        )));
    }
    let mut mags: Vec<f64> = fields.into_iter().flat_map(|f| f.magnitudes()).collect();
    if mags.is_empty() {
        return Err(AedError::NoTrainingData("no flow fields to take a magnitude percentile of".into()));
    }
    let rank = ((fraction * mags.len() as f64).ceil() as usize).clamp(1, mags.len());
    let (_, nth, _) = mags.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*nth)
}
