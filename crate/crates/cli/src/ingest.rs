use std::path::{Path, PathBuf};

use aed_core::GrayFrame;
use anyhow::{bail, Context, Result};
use image::{ColorType, DynamicImage};

const EXTENSIONS: [&str; 9] = ["png", "tif", "tiff", "bmp", "jpg", "jpeg", "pgm", "ppm", "pnm"];

/// Image files directly inside `dir`, sorted by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("cannot read frame directory {}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn bt601(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

pub fn to_gray(img: &DynamicImage) -> Result<GrayFrame> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<f64> = match img.color() {
        ColorType::L8 | ColorType::La8 => img.to_luma8().pixels().map(|p| f64::from(p.0[0]) / 255.0).collect(),
        ColorType::L16 | ColorType::La16 => img.to_luma16().pixels().map(|p| f64::from(p.0[0]) / 65535.0).collect(),
        ColorType::Rgb16 | ColorType::Rgba16 => img
            .to_rgb16()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0.map(|c| f64::from(c) / 65535.0);
                bt601(r, g, b)
            })
            .collect(),
        _ => img
            .to_rgb8()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0.map(|c| f64::from(c) / 255.0);
                bt601(r, g, b)
            })
            .collect(),
    };
    Ok(GrayFrame::new(h, w, values)?)
}

/// Decodes every frame in `dir`; needs at least 2 of identical size.
pub fn load_frames(dir: &Path) -> Result<Vec<GrayFrame>> {
    let files = list_frames(dir)?;
    if files.len() < 2 {
        bail!(
            "{} holds {} image frame(s); a sequence needs at least 2 frames",
            dir.display(),
            files.len()
        );
    }
    let mut frames: Vec<GrayFrame> = Vec::with_capacity(files.len());
    for path in &files {
        let img = image::open(path).with_context(|| format!("cannot decode {}", path.display()))?;
        let frame = to_gray(&img).with_context(|| format!("bad frame {}", path.display()))?;
        if let Some(first) = frames.first() {
            if (first.height(), first.width()) != (frame.height(), frame.width()) {
                bail!(
                    "{} is {}x{} but earlier frames are {}x{}",
                    path.display(),
                    frame.height(),
                    frame.width(),
                    first.height(),
                    first.width()
                );
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, Luma, Rgb, RgbImage};

    #[test]
    fn gray_and_rgb_conversion() {
        let g = DynamicImage::ImageLuma8(GrayImage::from_pixel(2, 3, Luma([51])));
        let f = to_gray(&g).unwrap();
        assert_eq!((f.height(), f.width()), (3, 2));
        assert!(f.pixels().iter().all(|&v| (v - 0.2).abs() < 1e-12));
        let c = DynamicImage::ImageRgb8(RgbImage::from_pixel(2, 2, Rgb([255, 0, 0])));
        assert!((to_gray(&c).unwrap().at(0, 0) - 0.299).abs() < 1e-12);
    }
}
