//! Lossless 8-bit image I/O (PNG and TIFF) bridging the `image` crate to
//! the float rasters used internally. Loads divide by 255; saves multiply
//! by 255 with round-half-up.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader, RgbImage};

use crate::error::Result;
use crate::raster::{ColorRaster, EdgeMap, GrayRaster};

fn to_unit(v: u8) -> f64 {
    v as f64 / 255.0
}

fn to_byte(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Load a 1- or 3-channel image as a color raster (gray inputs are
/// replicated across channels).
pub fn load_color(path: impl AsRef<Path>) -> Result<ColorRaster> {
    let img = ImageReader::open(path)?.decode()?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(gray) => {
            let plane: Vec<f64> = gray.as_raw().iter().map(|&v| to_unit(v)).collect();
            ColorRaster::new(w, h, [plane.clone(), plane.clone(), plane])
        }
        other => {
            let rgb = other.to_rgb8();
            let mut channels: [Vec<f64>; 3] = [
                Vec::with_capacity(w * h),
                Vec::with_capacity(w * h),
                Vec::with_capacity(w * h),
            ];
            for px in rgb.pixels() {
                channels[0].push(to_unit(px[0]));
                channels[1].push(to_unit(px[1]));
                channels[2].push(to_unit(px[2]));
            }
            ColorRaster::new(w, h, channels)
        }
    }
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayRaster> {
    let color = load_color(path)?;
    Ok(crate::raster::to_grayscale(&color))
}

pub fn save_gray(img: &GrayRaster, path: impl AsRef<Path>) -> Result<()> {
    let buf = GrayImage::from_vec(
        img.width() as u32,
        img.height() as u32,
        img.values().iter().map(|&v| to_byte(v)).collect(),
    )
    .expect("buffer size matches dimensions");
    buf.save(path)?;
    Ok(())
}

pub fn save_color(img: &ColorRaster, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = Vec::with_capacity(img.width() * img.height() * 3);
    for i in 0..img.width() * img.height() {
        bytes.push(to_byte(img.channel(0)[i]));
        bytes.push(to_byte(img.channel(1)[i]));
        bytes.push(to_byte(img.channel(2)[i]));
    }
    let buf = RgbImage::from_vec(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer size matches dimensions");
    buf.save(path)?;
    Ok(())
}

/// Save an edge map as an 8-bit image (1 -> 255).
pub fn save_edge_map(map: &EdgeMap, path: impl AsRef<Path>) -> Result<()> {
    let buf = GrayImage::from_vec(
        map.width() as u32,
        map.height() as u32,
        map.values().iter().map(|&v| v * 255).collect(),
    )
    .expect("buffer size matches dimensions");
    buf.save(path)?;
    Ok(())
}

/// Load an 8-bit image as a binary edge map (any nonzero pixel is an edge).
pub fn load_edge_map(path: impl AsRef<Path>) -> Result<EdgeMap> {
    let img = ImageReader::open(path)?.decode()?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    EdgeMap::new(w, h, img.as_raw().iter().map(|&v| (v > 0) as u8).collect())
}

/// Source image with predicted edges drawn in red.
pub fn save_overlay(img: &ColorRaster, edges: &EdgeMap, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = Vec::with_capacity(img.width() * img.height() * 3);
    for i in 0..img.width() * img.height() {
        if edges.values()[i] == 1 {
            bytes.extend_from_slice(&[255, 0, 0]);
        } else {
            bytes.push(to_byte(img.channel(0)[i]));
            bytes.push(to_byte(img.channel(1)[i]));
            bytes.push(to_byte(img.channel(2)[i]));
        }
    }
    let buf = RgbImage::from_vec(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer size matches dimensions");
    buf.save(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn png_roundtrip_preserves_bytes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.png");
        let img = GrayRaster::from_fn(16, 9, |x, y| ((x * 16 + y) % 256) as f64 / 255.0).unwrap();
        save_gray(&img, &path).unwrap();
        let back = load_gray(&path).unwrap();
        for (a, b) in img.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tiff_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.tiff");
        let img = ColorRaster::constant(8, 8, [0.2, 0.5, 0.8]).unwrap();
        save_color(&img, &path).unwrap();
        let back = load_color(&path).unwrap();
        for c in 0..3 {
            for (a, b) in img.channel(c).iter().zip(back.channel(c)) {
                assert!((a - b).abs() < 1.0 / 255.0);
            }
        }
    }

    #[test]
    fn edge_map_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("e.png");
        let map = EdgeMap::new(4, 2, vec![0, 1, 0, 1, 1, 0, 0, 1]).unwrap();
        save_edge_map(&map, &path).unwrap();
        assert_eq!(load_edge_map(&path).unwrap(), map);
    }
}
