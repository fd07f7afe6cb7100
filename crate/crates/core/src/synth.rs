//! Synthetic crowd scenes with a labeled anomaly window.
//!
//! Bright anti-aliased discs drift coherently over a dark toroidal field.
//! Inside `[anomaly_start, anomaly_end)` they either scatter away from the
//! image centre (`divergent`) or pick random headings (`random`), at
//! `anomaly_multiplier` times their normal speed. The `intruder` style
//! instead leaves the crowd alone and adds one disc crossing it
//! perpendicularly at `anomaly_multiplier * speed_max`. Frames are quantized to
//! 8 bits so they survive a PNG round trip unchanged.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_kv, parse_value};
use crate::error::{AedError, Result};
use crate::image::GrayFrame;

const BACKGROUND: f64 = 0.1;
const FOREGROUND: f64 = 0.9;
/// Heading spread around `direction` for normal motion, radians.
const HEADING_JITTER: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnomalyStyle {
    Divergent,
    Random,
    Intruder,
}

impl FromStr for AnomalyStyle {
    type Err = AedError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "divergent" => Ok(AnomalyStyle::Divergent),
            "random" => Ok(AnomalyStyle::Random),
            "intruder" => Ok(AnomalyStyle::Intruder),
            _ => Err(AedError::Config(format!(
                "anomaly_style: expected divergent, random or intruder, got {s:?}"
            ))),
        }
    }
}

impl AnomalyStyle {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnomalyStyle::Divergent => "divergent",
            AnomalyStyle::Random => "random",
            AnomalyStyle::Intruder => "intruder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub particles: usize,
    pub radius: f64,
    /// Normal speed range in pixels/frame.
    pub speed_min: f64,
    pub speed_max: f64,
    /// Mean heading of normal motion, radians (0 = +columns).
    pub direction: f64,
    pub anomaly_start: usize,
    pub anomaly_end: usize,
    pub anomaly_multiplier: f64,
    pub anomaly_style: AnomalyStyle,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            frames: 200,
            height: 120,
            width: 160,
            particles: 30,
            radius: 3.0,
            speed_min: 0.5,
            speed_max: 1.0,
            direction: 0.0,
            anomaly_start: 150,
            anomaly_end: 190,
            anomaly_multiplier: 4.0,
            anomaly_style: AnomalyStyle::Divergent,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthClip {
    pub frames: Vec<GrayFrame>,
    /// Raw 8-bit pixels of each frame, row-major.
    pub pixels: Vec<Vec<u8>>,
    /// True for frames inside the anomaly window.
    pub labels: Vec<bool>,
    /// Intruder centre `(row, col)` per frame, when one is drawn.
    pub intruder: Vec<Option<(f64, f64)>>,
    radius: f64,
}

impl SynthClip {
    /// `frame_index,label` rows with `1` for abnormal.
    pub fn labels_csv(&self) -> String {
        let mut s = String::from("frame_index,label\n");
        for (i, &l) in self.labels.iter().enumerate() {
            let _ = writeln!(s, "{i},{}", u8::from(l));
        }
        s
    }

    /// Whether the tile at `origin` touches the intruder in frame `t` or
    /// `t + 1`, i.e. whether `flow(t, t+1)` sees it there.
    pub fn intruder_in_tile(&self, t: usize, origin: (usize, usize), patch_h: usize, patch_w: usize) -> bool {
        let (h, w) = (self.frames[0].height() as f64, self.frames[0].width() as f64);
        let reach = self.radius + 1.0;
        let touches = |(row, col): (f64, f64)| {
            let (r0, c0) = (origin.0 as f64, origin.1 as f64);
            let (r1, c1) = (r0 + patch_h as f64 - 1.0, c0 + patch_w as f64 - 1.0);
            [-h, 0.0, h].iter().any(|dr| {
                [-w, 0.0, w].iter().any(|dc| {
                    let (pr, pc) = (row + dr, col + dc);
                    let nr = pr.clamp(r0, r1);
                    let nc = pc.clamp(c0, c1);
                    (pr - nr).hypot(pc - nc) <= reach
                })
            })
        };
        [t, t + 1]
            .iter()
            .filter_map(|&i| self.intruder.get(i).copied().flatten())
            .any(touches)
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AedError::InvalidParameter(m));
        if self.frames < 2 || self.height < 2 || self.width < 2 {
            return bad("synth needs at least 2 frames of at least 2x2".into());
        }
        if self.anomaly_start > self.anomaly_end || self.anomaly_end > self.frames {
            return bad(format!(
                "anomaly window [{}, {}) does not fit {} frames",
                self.anomaly_start, self.anomaly_end, self.frames
            ));
        }
        if !(self.radius > 0.0 && self.speed_min >= 0.0 && self.speed_max >= self.speed_min) {
            return bad("synth radius must be > 0 and 0 <= speed_min <= speed_max".into());
        }
        if !(self.anomaly_multiplier > 0.0 && self.direction.is_finite() && self.speed_max.is_finite()) {
            return bad("synth anomaly_multiplier must be > 0".into());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.strip_prefix("synth.").unwrap_or(key);
        match key {
            "frames" => self.frames = parse_value(key, value)?,
            "height" => self.height = parse_value(key, value)?,
            "width" => self.width = parse_value(key, value)?,
            "particles" => self.particles = parse_value(key, value)?,
            "radius" => self.radius = parse_value(key, value)?,
            "speed_min" => self.speed_min = parse_value(key, value)?,
            "speed_max" => self.speed_max = parse_value(key, value)?,
            "direction" => self.direction = parse_value(key, value)?,
            "anomaly_start" => self.anomaly_start = parse_value(key, value)?,
            "anomaly_end" => self.anomaly_end = parse_value(key, value)?,
            "anomaly_multiplier" => self.anomaly_multiplier = parse_value(key, value)?,
            "anomaly_style" => self.anomaly_style = value.parse()?,
            "seed" => self.seed = parse_value(key, value)?,
            _ => return Err(AedError::Config(format!("unknown synth key {key:?}"))),
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut s = SynthSpec::default();
        for (k, v) in parse_kv(text)? {
            s.set(&k, &v)?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        format!(
            "frames = {}\nheight = {}\nwidth = {}\nparticles = {}\nradius = {}\nspeed_min = {}\n\
             speed_max = {}\ndirection = {}\nanomaly_start = {}\nanomaly_end = {}\n\
             anomaly_multiplier = {}\nanomaly_style = {}\nseed = {}\n",
            self.frames,
            self.height,
            self.width,
            self.particles,
            self.radius,
            self.speed_min,
            self.speed_max,
            self.direction,
            self.anomaly_start,
            self.anomaly_end,
            self.anomaly_multiplier,
            self.anomaly_style.as_str(),
            self.seed
        )
    }

    pub fn is_anomalous(&self, frame: usize) -> bool {
        (self.anomaly_start..self.anomaly_end).contains(&frame)
    }
}

struct Particle {
    row: f64,
    col: f64,
    speed: f64,
    heading: f64,
    wild_heading: f64,
}

fn render(spec: &SynthSpec, particles: &[Particle], intruder: Option<(f64, f64)>) -> Vec<u8> {
    let (h, w) = (spec.height, spec.width);
    let mut cover = vec![0.0f64; h * w];
    let reach = spec.radius + 1.0;
    let centres = particles.iter().map(|p| (p.row, p.col)).chain(intruder);
    for (row, col) in centres {
        let r0 = (row - reach).floor() as i64;
        let c0 = (col - reach).floor() as i64;
        let r1 = (row + reach).ceil() as i64;
        let c1 = (col + reach).ceil() as i64;
        for r in r0..=r1 {
            for c in c0..=c1 {
                let (dr, dc) = (r as f64 - row, c as f64 - col);
                let a = (spec.radius + 0.5 - (dr * dr + dc * dc).sqrt()).clamp(0.0, 1.0);
                if a > 0.0 {
                    let rr = r.rem_euclid(h as i64) as usize;
                    let cc = c.rem_euclid(w as i64) as usize;
                    let px = &mut cover[rr * w + cc];
                    *px = px.max(a);
                }
            }
        }
    }
    cover
        .into_iter()
        .map(|a| ((BACKGROUND + (FOREGROUND - BACKGROUND) * a) * 255.0).round() as u8)
        .collect()
}

/// Renders the clip described by `spec`; equal specs give identical clips.
pub fn generate(spec: &SynthSpec) -> Result<SynthClip> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (h, w) = (spec.height as f64, spec.width as f64);
    let mut particles: Vec<Particle> = (0..spec.particles)
        .map(|_| Particle {
            row: rng.random_range(0.0..h),
            col: rng.random_range(0.0..w),
            speed: if spec.speed_max > spec.speed_min {
                rng.random_range(spec.speed_min..spec.speed_max)
            } else {
                spec.speed_min
            },
            heading: spec.direction + rng.random_range(-HEADING_JITTER..=HEADING_JITTER),
            wild_heading: rng.random_range(0.0..TAU),
        })
        .collect();

    let (cr, cc) = ((h - 1.0) / 2.0, (w - 1.0) / 2.0);
    let mut clip = SynthClip {
        frames: Vec::with_capacity(spec.frames),
        pixels: Vec::with_capacity(spec.frames),
        labels: Vec::with_capacity(spec.frames),
        intruder: Vec::with_capacity(spec.frames),
        radius: spec.radius,
    };
    let intruder_heading = spec.direction + std::f64::consts::FRAC_PI_2;
    let intruder_step = spec.speed_max * spec.anomaly_multiplier;
    for t in 0..spec.frames {
        // Drawn on every frame the window's motion touches, including `anomaly_end`.
        let intruder = (spec.anomaly_style == AnomalyStyle::Intruder
            && t >= spec.anomaly_start
            && t <= spec.anomaly_end
            && spec.anomaly_end > spec.anomaly_start)
            .then(|| {
                let d = (t - spec.anomaly_start) as f64 * intruder_step;
                (
                    (d * intruder_heading.sin()).rem_euclid(h),
                    (cc + d * intruder_heading.cos()).rem_euclid(w),
                )
            });
        let px = render(spec, &particles, intruder);
        clip.frames.push(GrayFrame::from_u8(spec.height, spec.width, &px)?);
        clip.pixels.push(px);
        clip.labels.push(spec.is_anomalous(t));
        clip.intruder.push(intruder);

        // Motion from frame t to t+1 follows frame t's regime.
        for p in &mut particles {
            let (speed, heading) = match spec.anomaly_style {
                AnomalyStyle::Divergent if spec.is_anomalous(t) => {
                    (p.speed * spec.anomaly_multiplier, (p.row - cr).atan2(p.col - cc))
                }
                AnomalyStyle::Random if spec.is_anomalous(t) => (p.speed * spec.anomaly_multiplier, p.wild_heading),
                _ => (p.speed, p.heading),
            };
            p.col = (p.col + speed * heading.cos()).rem_euclid(w);
            p.row = (p.row + speed * heading.sin()).rem_euclid(h);
        }
    }
    Ok(clip)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            frames: 12,
            height: 30,
            width: 40,
            particles: 5,
            anomaly_start: 8,
            anomaly_end: 10,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.pixels, b.pixels);
        let c = generate(&SynthSpec { seed: 8, ..small() }).unwrap();
        assert_ne!(a.pixels, c.pixels);
    }

    #[test]
    fn labels_follow_window() {
        let clip = generate(&small()).unwrap();
        let expect: Vec<bool> = (0..12).map(|t| (8..10).contains(&t)).collect();
        assert_eq!(clip.labels, expect);
        assert!(clip.labels_csv().starts_with("frame_index,label\n0,0\n"));
        assert!(clip.labels_csv().contains("\n8,1\n9,1\n10,0\n"));
    }

    #[test]
    fn pixels_are_in_range_and_match_frames() {
        let clip = generate(&small()).unwrap();
        for (f, px) in clip.frames.iter().zip(&clip.pixels) {
            assert_eq!(f.pixels().len(), px.len());
            for (&a, &b) in f.pixels().iter().zip(px) {
                assert_eq!(a, b as f64 / 255.0);
            }
            assert!(px.iter().any(|&p| p > 200));
        }
    }

    #[test]
    fn intruder_path_and_tiles() {
        let spec = SynthSpec { anomaly_style: AnomalyStyle::Intruder, particles: 0, ..small() };
        let clip = generate(&spec).unwrap();
        let drawn: Vec<usize> = (0..12).filter(|&t| clip.intruder[t].is_some()).collect();
        assert_eq!(drawn, vec![8, 9, 10]);
        let (row, col) = clip.intruder[8].unwrap();
        assert!(row.abs() < 1e-12 && (col - 19.5).abs() < 1e-12, "{row} {col}");
        assert!(clip.intruder_in_tile(8, (0, 16), 10, 10));
        assert!(!clip.intruder_in_tile(8, (10, 0), 10, 10));
        assert!(!clip.intruder_in_tile(2, (0, 16), 10, 10));
        // With no crowd, only the intruder lights up any pixel.
        assert!(clip.pixels[3].iter().all(|&p| p == 26));
        assert!(clip.pixels[9].iter().any(|&p| p > 200));
    }

    #[test]
    fn spec_text_round_trip() {
        let s = SynthSpec { anomaly_style: AnomalyStyle::Random, direction: 0.5, ..small() };
        assert_eq!(SynthSpec::from_text(&s.to_text()).unwrap(), s);
        assert!(SynthSpec::from_text("anomaly_end = 500").is_err());
        assert!(SynthSpec::from_text("colour = blue").is_err());
    }
}
