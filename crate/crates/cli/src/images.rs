//! Image ingestion: 8- and 16-bit grayscale for complex pairs, RGB for hue.

use std::path::Path;

use anyhow::{Context, Result};
use image::DynamicImage;

/// Loads a grayscale image as a signed plane for complex-pair input:
/// mid-gray maps to exactly 0 and full white to exactly 1, so a constant
/// (255, 128) 8-bit pair decodes to the complex value (1, 0). Black lands
/// slightly below -1, which the phase observation does not mind.
pub fn load_signed_plane(path: &Path) -> Result<(Vec<f64>, u32, u32)> {
    let img = image::open(path).with_context(|| format!("decoding image {}", path.display()))?;
    let (values, w, h) = match img {
        DynamicImage::ImageLuma8(img) => {
            let (w, h) = img.dimensions();
            let v = img
                .into_raw()
                .into_iter()
                .map(|v| (v as f64 - 128.0) / 127.0)
                .collect();
            (v, w, h)
        }
        other => {
            let img = other.to_luma16();
            let (w, h) = img.dimensions();
            let v = img
                .into_raw()
                .into_iter()
                .map(|v| (v as f64 - 32768.0) / 32767.0)
                .collect();
            (v, w, h)
        }
    };
    Ok((values, w, h))
}

/// Loads an RGB image as three channel buffers in [0, 1].
#[allow(clippy::type_complexity)]
pub fn load_rgb(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, u32, u32)> {
    let img = image::open(path)
        .with_context(|| format!("decoding image {}", path.display()))?
        .to_rgb16();
    let (w, h) = img.dimensions();
    let n = (w * h) as usize;
    let raw = img.into_raw();
    let mut r = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for px in raw.chunks_exact(3) {
        r.push(px[0] as f64 / 65535.0);
        g.push(px[1] as f64 / 65535.0);
        b.push(px[2] as f64 / 65535.0);
    }
    Ok((r, g, b, w, h))
}
