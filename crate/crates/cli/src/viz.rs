//! 8-bit preview images of angle maps.
//!
//! The grayscale mapping takes [-pi, pi) linearly to [0, 255]; the wrap seam
//! shows up as a hard 0/255 edge, which is a property of the preview, not of
//! the reconstruction. The hue mapping wraps the angle around the colour
//! wheel and has no seam.

use std::path::Path;

use anyhow::{bail, Context, Result};
use cyclic_maxflow::SpatialScalarField;
use image::{GrayImage, RgbImage};
use std::f64::consts::{PI, TAU};

use crate::config::PreviewMode;

fn image_dims(field: &SpatialScalarField) -> Result<(u32, u32)> {
    let dims = field.grid().spatial_dims();
    match dims.len() {
        1 => Ok((dims[0] as u32, 1)),
        2 => Ok((dims[0] as u32, dims[1] as u32)),
        _ => bail!(
            "previews support 1-D and 2-D fields, got {} axes",
            dims.len()
        ),
    }
}

/// Grayscale byte for an angle in [-pi, pi).
pub fn angle_to_gray(theta: f64) -> u8 {
    let t = ((theta + PI) / TAU * 255.0).round();
    t.clamp(0.0, 255.0) as u8
}

/// Fully saturated hue-wheel colour for an angle in [-pi, pi).
pub fn angle_to_hue_rgb(theta: f64) -> [u8; 3] {
    let h6 = (theta + PI) / TAU * 6.0; // [0, 6)
    let sector = (h6.floor() as i64).clamp(0, 5) as usize;
    let frac = h6 - sector as f64;
    let x = (255.0 * (1.0 - frac)).round() as u8;
    let y = (255.0 * frac).round() as u8;
    match sector {
        0 => [255, y, 0],
        1 => [x, 255, 0],
        2 => [0, 255, y],
        3 => [0, x, 255],
        4 => [y, 0, 255],
        _ => [255, 0, x],
    }
}

/// Writes an 8-bit preview PNG of a label map.
pub fn write_preview(path: &Path, labels: &SpatialScalarField, mode: PreviewMode) -> Result<()> {
    let (w, h) = image_dims(labels)?;
    match mode {
        PreviewMode::Gray => {
            let mut img = GrayImage::new(w, h);
            for (i, &theta) in labels.values().iter().enumerate() {
                let (x, y) = (i as u32 % w, i as u32 / w);
                img.put_pixel(x, y, image::Luma([angle_to_gray(theta)]));
            }
            img.save(path)
                .with_context(|| format!("writing preview {}", path.display()))?;
        }
        PreviewMode::Hue => {
            let mut img = RgbImage::new(w, h);
            for (i, &theta) in labels.values().iter().enumerate() {
                let (x, y) = (i as u32 % w, i as u32 / w);
                img.put_pixel(x, y, image::Rgb(angle_to_hue_rgb(theta)));
            }
            img.save(path)
                .with_context(|| format!("writing preview {}", path.display()))?;
        }
    }
    Ok(())
}
