//! Flat `key = value` configuration text and named presets.
//!
//! Blank lines and `#` comments are ignored. Keys are dotted
//! (`pcanet.k1`, `kpca.sigma`, ...). Serialization writes every key in a
//! fixed order, so equal configs always produce identical text.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{AedError, Result};
use crate::featnet::LrnParams;
use crate::pipeline::{EvalMode, PipelineConfig};

/// Parses `key = value` lines, keeping their order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| AedError::Config(format!("line {}: expected key=value, got {raw:?}", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(AedError::Config(format!("line {}: empty key", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub(crate) fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| AedError::Config(format!("{key}: cannot parse {value:?}")))
}

pub(crate) fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(AedError::Config(format!("{key}: expected true/false, got {value:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// UMN lawn scene; same as `UmnLawn`.
    Umn,
    UmnLawn,
    UmnIndoor,
    UmnPlaza,
    Ucsd,
}

impl Preset {
    pub const NAMES: [&'static str; 5] = ["umn", "umn-lawn", "umn-indoor", "umn-plaza", "ucsd"];

    pub fn config(self) -> PipelineConfig {
        let mut c = PipelineConfig::default();
        match self {
            Preset::Umn | Preset::UmnLawn | Preset::UmnIndoor | Preset::UmnPlaza => {
                c.pcanet.k1 = 3;
                c.pcanet.k2 = 3;
                c.pcanet.l1 = 8;
                c.pcanet.l2 = 8;
                c.pcanet.block_h = 8;
                c.pcanet.block_w = 8;
                c.pcanet.lrn = None;
                c.gate.min_blob_count = 3;
                c.augment_enabled = true;
                c.eval_mode = EvalMode::FrameLevel;
                (c.kpca.sigma, c.kpca.q) = match self {
                    Preset::UmnIndoor => (1.0, 3800),
                    Preset::UmnPlaza => (0.25, 4200),
                    _ => (1.0, 2800),
                };
            }
            Preset::Ucsd => {
                c.pcanet.k1 = 5;
                c.pcanet.k2 = 5;
                c.pcanet.l1 = 7;
                c.pcanet.l2 = 7;
                c.pcanet.block_h = 7;
                c.pcanet.block_w = 7;
                c.pcanet.lrn = Some(LrnParams::default());
                c.kpca.sigma = 0.8;
                c.kpca.q = 1350;
                c.gate.min_blob_count = 1;
                c.augment_enabled = false;
                c.eval_mode = EvalMode::PixelLevel;
                c.patch_h = 12;
                c.patch_w = 16;
                c.max_train_samples = 4000;
            }
        }
        c
    }
}

impl FromStr for Preset {
    type Err = AedError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "umn" => Ok(Preset::Umn),
            "umn-lawn" => Ok(Preset::UmnLawn),
            "umn-indoor" => Ok(Preset::UmnIndoor),
            "umn-plaza" => Ok(Preset::UmnPlaza),
            "ucsd" => Ok(Preset::Ucsd),
            other => Err(AedError::Config(format!(
                "unknown preset {other:?}; expected one of {}",
                Preset::NAMES.join(", ")
            ))),
        }
    }
}

impl PipelineConfig {
    /// Sets one dotted key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let lrn = self.pcanet.lrn.unwrap_or(self.lrn_params);
        match key {
            "hs.alpha" => self.hs.alpha = parse_value(key, value)?,
            "hs.max_iters" => self.hs.max_iters = parse_value(key, value)?,
            "hs.tol" => self.hs.tol = parse_value(key, value)?,
            "pcanet.k1" => self.pcanet.k1 = parse_value(key, value)?,
            "pcanet.k2" => self.pcanet.k2 = parse_value(key, value)?,
            "pcanet.l1" => self.pcanet.l1 = parse_value(key, value)?,
            "pcanet.l2" => self.pcanet.l2 = parse_value(key, value)?,
            "pcanet.block_h" => self.pcanet.block_h = parse_value(key, value)?,
            "pcanet.block_w" => self.pcanet.block_w = parse_value(key, value)?,
            "pcanet.lrn" => {
                self.lrn_params = lrn;
                self.pcanet.lrn = if parse_bool(key, value)? { Some(lrn) } else { None };
            }
            "lrn.bias" | "lrn.weight" | "lrn.depth" | "lrn.exponent" => {
                let mut p = lrn;
                match key {
                    "lrn.bias" => p.bias = parse_value(key, value)?,
                    "lrn.weight" => p.weight = parse_value(key, value)?,
                    "lrn.depth" => p.depth = parse_value(key, value)?,
                    _ => p.exponent = parse_value(key, value)?,
                }
                self.lrn_params = p;
                if self.pcanet.lrn.is_some() {
                    self.pcanet.lrn = Some(p);
                }
            }
            "kpca.sigma" => self.kpca.sigma = parse_value(key, value)?,
            "kpca.q" => self.kpca.q = parse_value(key, value)?,
            "gate.diff_threshold" => self.gate.diff_threshold = parse_value(key, value)?,
            "gate.min_blob_area" => self.gate.min_blob_area = parse_value(key, value)?,
            "gate.min_blob_count" => self.gate.min_blob_count = parse_value(key, value)?,
            "augment.enabled" => self.augment_enabled = parse_bool(key, value)?,
            "eval.mode" => {
                self.eval_mode = match value {
                    "frame_level" => EvalMode::FrameLevel,
                    "pixel_level" => EvalMode::PixelLevel,
                    _ => {
                        return Err(AedError::Config(format!(
                            "eval.mode: expected frame_level or pixel_level, got {value:?}"
                        )))
                    }
                }
            }
            "eval.patch_h" => self.patch_h = parse_value(key, value)?,
            "eval.patch_w" => self.patch_w = parse_value(key, value)?,
            "working.h" => self.working_h = parse_value(key, value)?,
            "working.w" => self.working_w = parse_value(key, value)?,
            "flow.cap_percentile" => self.cap_percentile = parse_value(key, value)?,
            "train.max_samples" => self.max_train_samples = parse_value(key, value)?,
            _ => return Err(AedError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every line of `text` on top of `self`, then validates.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_kv(text)? {
            self.set(&k, &v)?;
        }
        self.validate()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Canonical text: every key, fixed order, shortest round-trip floats.
    pub fn to_text(&self) -> String {
        let lrn = self.pcanet.lrn.unwrap_or(self.lrn_params);
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("hs.alpha", self.hs.alpha.to_string());
        kv("hs.max_iters", self.hs.max_iters.to_string());
        kv("hs.tol", self.hs.tol.to_string());
        kv("pcanet.k1", self.pcanet.k1.to_string());
        kv("pcanet.k2", self.pcanet.k2.to_string());
        kv("pcanet.l1", self.pcanet.l1.to_string());
        kv("pcanet.l2", self.pcanet.l2.to_string());
        kv("pcanet.block_h", self.pcanet.block_h.to_string());
        kv("pcanet.block_w", self.pcanet.block_w.to_string());
        kv("pcanet.lrn", self.pcanet.lrn.is_some().to_string());
        kv("lrn.bias", lrn.bias.to_string());
        kv("lrn.weight", lrn.weight.to_string());
        kv("lrn.depth", lrn.depth.to_string());
        kv("lrn.exponent", lrn.exponent.to_string());
        kv("kpca.sigma", self.kpca.sigma.to_string());
        kv("kpca.q", self.kpca.q.to_string());
        kv("gate.diff_threshold", self.gate.diff_threshold.to_string());
        kv("gate.min_blob_area", self.gate.min_blob_area.to_string());
        kv("gate.min_blob_count", self.gate.min_blob_count.to_string());
        kv("augment.enabled", self.augment_enabled.to_string());
        kv("eval.mode", self.eval_mode.as_str().to_string());
        kv("eval.patch_h", self.patch_h.to_string());
        kv("eval.patch_w", self.patch_w.to_string());
        kv("working.h", self.working_h.to_string());
        kv("working.w", self.working_w.to_string());
        kv("flow.cap_percentile", self.cap_percentile.to_string());
        kv("train.max_samples", self.max_train_samples.to_string());
        s
    }
}
