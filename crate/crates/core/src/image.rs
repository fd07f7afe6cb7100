//! Planar real-valued images shared by every stage.
//!
//! Pixels are stored channel-major: all of channel 0 row by row, then
//! channel 1, and so on. `Map` carries no range invariant; [`GrayFrame`]
//! and [`FlowMap`] wrap it and enforce the `[0,1]` range at construction.

use crate::error::{AedError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Map {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Map {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Map {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(AedError::InvalidParameter(format!(
                "map dimensions must be positive, got {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(AedError::dims(
                format!("{} values for {height}x{width}x{channels}", height * width * channels),
                format!("{} values", data.len()),
            ));
        }
        Ok(Map {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(height * width * channels);
        for c in 0..channels {
            for r in 0..height {
                for x in 0..width {
                    data.push(f(r, x, c));
                }
            }
        }
        Map {
            height,
            width,
            channels,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(channel * self.height + row) * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, channel: usize, value: f64) {
        self.data[(channel * self.height + row) * self.width + col] = value;
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[channel * n..(channel + 1) * n]
    }

    pub fn plane_mut(&mut self, channel: usize) -> &mut [f64] {
        let n = self.height * self.width;
        &mut self.data[channel * n..(channel + 1) * n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies the `height x width` window whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<Map> {
        if height == 0 || width == 0 || row + height > self.height || col + width > self.width {
            return Err(AedError::InvalidParameter(format!(
                "crop {height}x{width} at ({row},{col}) outside {}x{} map",
                self.height, self.width
            )));
        }
        Ok(Map::from_fn(height, width, self.channels, |r, x, c| {
            self.get(row + r, col + x, c)
        }))
    }

    /// Bilinear resampling with corner-aligned sampling: output corners land
    /// exactly on input corners.
    pub fn resize_bilinear(&self, out_h: usize, out_w: usize) -> Result<Map> {
        if out_h == 0 || out_w == 0 {
            return Err(AedError::InvalidParameter(format!(
                "resize target must be positive, got {out_h}x{out_w}"
            )));
        }
        if out_h == self.height && out_w == self.width {
            return Ok(self.clone());
        }
        let rows = axis_samples(self.height, out_h);
        let cols = axis_samples(self.width, out_w);
        let mut out = Map::zeros(out_h, out_w, self.channels);
        for c in 0..self.channels {
            let src = self.plane(c);
            let dst = out.plane_mut(c);
            for (r, &(r0, r1, fr)) in rows.iter().enumerate() {
                for (x, &(c0, c1, fc)) in cols.iter().enumerate() {
                    let top = src[r0 * self.width + c0] * (1.0 - fc) + src[r0 * self.width + c1] * fc;
                    let bottom =
                        src[r1 * self.width + c0] * (1.0 - fc) + src[r1 * self.width + c1] * fc;
                    dst[r * out_w + x] = top * (1.0 - fr) + bottom * fr;
                }
            }
        }
        Ok(out)
    }
}

/// For each output coordinate: lower source index, upper source index, weight of the upper.
fn axis_samples(input: usize, output: usize) -> Vec<(usize, usize, f64)> {
    (0..output)
        .map(|i| {
            if output == 1 || input == 1 {
                return (0, 0, 0.0);
            }
            let pos = i as f64 * (input - 1) as f64 / (output - 1) as f64;
            let lo = (pos.floor() as usize).min(input - 1);
            let hi = (lo + 1).min(input - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect()
}

fn check_unit_range(map: &Map, what: &'static str) -> Result<()> {
    if !map.all_finite() {
        return Err(AedError::NonFinite(what));
    }
    if let Some(v) = map.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(AedError::InvalidParameter(format!(
            "{what} values must lie in [0,1], found {v}"
        )));
    }
    Ok(())
}

/// Single-channel intensity frame with values in `[0,1]`, at least 2x2.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame(Map);

impl GrayFrame {
    pub fn new(height: usize, width: usize, intensities: Vec<f64>) -> Result<Self> {
        Self::from_map(Map::from_vec(height, width, 1, intensities)?)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_map(Map::from_fn(height, width, 1, |r, c, _| f(r, c)))
    }

    /// 8-bit samples mapped to `[0,1]` by dividing by 255.
    pub fn from_u8(height: usize, width: usize, pixels: &[u8]) -> Result<Self> {
        Self::new(height, width, pixels.iter().map(|&p| p as f64 / 255.0).collect())
    }

    pub fn from_map(map: Map) -> Result<Self> {
        if map.channels() != 1 {
            return Err(AedError::dims("1 channel", format!("{} channels", map.channels())));
        }
        if map.height() < 2 || map.width() < 2 {
            return Err(AedError::InvalidParameter(format!(
                "frames need at least 2x2 pixels, got {}x{}",
                map.height(),
                map.width()
            )));
        }
        check_unit_range(&map, "gray frame")?;
        Ok(GrayFrame(map))
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.0.get(row, col, 0)
    }

    pub fn pixels(&self) -> &[f64] {
        self.0.data()
    }

    pub fn as_map(&self) -> &Map {
        &self.0
    }

    pub fn resize_bilinear(&self, out_h: usize, out_w: usize) -> Result<GrayFrame> {
        self.0.resize_bilinear(out_h, out_w).map(GrayFrame)
    }
}

/// Three-channel color-encoded motion image with values in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap(Map);

impl FlowMap {
    pub fn from_map(map: Map) -> Result<Self> {
        if map.channels() != 3 {
            return Err(AedError::dims("3 channels", format!("{} channels", map.channels())));
        }
        check_unit_range(&map, "flow map")?;
        Ok(FlowMap(map))
    }

    /// Every pixel set to `rgb`.
    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::from_map(Map::from_fn(height, width, 3, |_, _, c| rgb[c]))
    }

    pub(crate) fn from_map_unchecked(map: Map) -> Self {
        debug_assert_eq!(map.channels(), 3);
        FlowMap(map)
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn rgb(&self, row: usize, col: usize) -> [f64; 3] {
        [self.0.get(row, col, 0), self.0.get(row, col, 1), self.0.get(row, col, 2)]
    }

    pub fn as_map(&self) -> &Map {
        &self.0
    }

    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<FlowMap> {
        self.0.crop(row, col, height, width).map(FlowMap)
    }

    pub fn resize_bilinear(&self, out_h: usize, out_w: usize) -> Result<FlowMap> {
        // Convex combinations of [0,1] values stay in [0,1].
        self.0.resize_bilinear(out_h, out_w).map(FlowMap)
    }
}
