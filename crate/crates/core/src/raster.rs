//! Raster value types shared by every stage of the pipeline.
//!
//! All image data is held as `f64` intensities in `[0, 1]`. 8-bit inputs
//! are divided by 255 on load and written back with round-half-up on save
//! so chained filters never accumulate quantization drift.

use crate::error::{Error, Result};

/// Single-channel float raster, the working representation of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayRaster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayRaster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateInput("empty raster".into()));
        }
        if data.len() != width * height {
            return Err(Error::DegenerateInput(format!(
                "buffer length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if !data.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
            return Err(Error::DegenerateInput(
                "gray intensities must be finite and in [0, 1]".into(),
            ));
        }
        Ok(Self { width, height, data })
    }

    /// Constructor for values already known to satisfy the invariants.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
        Self { width, height, data }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with reflect-101 border handling (mirror without repeating
    /// the edge pixel). Accepts coordinates outside the raster.
    #[inline]
    pub fn get_reflect(&self, x: isize, y: isize) -> f64 {
        let xi = reflect_index(x, self.width);
        let yi = reflect_index(y, self.height);
        self.data[yi * self.width + xi]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// 3-channel image, kept only until white balancing; everything after
/// runs on [`GrayRaster`].
#[derive(Debug, Clone, PartialEq)]
pub struct ColorRaster {
    width: usize,
    height: usize,
    channels: [Vec<f64>; 3],
}

impl ColorRaster {
    pub fn new(width: usize, height: usize, channels: [Vec<f64>; 3]) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateInput("empty raster".into()));
        }
        for plane in &channels {
            if plane.len() != width * height {
                return Err(Error::DegenerateInput(
                    "channel planes must all match width x height".into(),
                ));
            }
            if !plane.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
                return Err(Error::DegenerateInput(
                    "channel intensities must be finite and in [0, 1]".into(),
                ));
            }
        }
        Ok(Self { width, height, channels })
    }

    pub(crate) fn from_raw(width: usize, height: usize, channels: [Vec<f64>; 3]) -> Self {
        Self { width, height, channels }
    }

    pub fn constant(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        let n = width * height;
        Self::new(width, height, [vec![rgb[0]; n], vec![rgb[1]; n], vec![rgb[2]; n]])
    }

    /// Replicate a gray image into all three channels.
    pub fn from_gray(gray: &GrayRaster) -> Self {
        let plane = gray.values().to_vec();
        Self {
            width: gray.width(),
            height: gray.height(),
            channels: [plane.clone(), plane.clone(), plane],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channel_mean(&self, c: usize) -> f64 {
        let plane = &self.channels[c];
        plane.iter().sum::<f64>() / plane.len() as f64
    }

    /// Nearest-neighbor resample. Used by the benchmark driver so that
    /// rescaling introduces no smoothing of its own.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Result<ColorRaster> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateInput("empty target size".into()));
        }
        let mut channels: [Vec<f64>; 3] = [
            Vec::with_capacity(width * height),
            Vec::with_capacity(width * height),
            Vec::with_capacity(width * height),
        ];
        for (c, out) in channels.iter_mut().enumerate() {
            let src = &self.channels[c];
            for y in 0..height {
                let sy = (y * self.height) / height;
                for x in 0..width {
                    let sx = (x * self.width) / width;
                    out.push(src[sy * self.width + sx]);
                }
            }
        }
        Ok(ColorRaster::from_raw(width, height, channels))
    }
}

/// Binary raster holding predicted edges or rasterized ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateInput("empty edge map".into()));
        }
        if data.len() != width * height {
            return Err(Error::DegenerateInput("buffer length mismatch".into()));
        }
        if !data.iter().all(|&v| v <= 1) {
            return Err(Error::DegenerateInput("edge map values must be 0 or 1".into()));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        debug_assert!(v <= 1);
        self.data[y * self.width + x] = v;
    }

    pub fn values(&self) -> &[u8] {
        &self.data
    }

    pub fn count_ones(&self) -> u64 {
        self.data.iter().map(|&v| v as u64).sum()
    }
}

/// 256-bin count histogram over round-half-up quantized intensities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntensityHistogram {
    bins: [u64; 256],
    total: u64,
}

impl IntensityHistogram {
    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn non_empty(&self) -> usize {
        self.bins.iter().filter(|&&c| c > 0).count()
    }
}

/// Quantize an intensity in [0,1] to its histogram bin: floor(v*255 + 0.5).
#[inline]
pub fn quantize_bin(v: f64) -> usize {
    (v * 255.0 + 0.5).floor() as usize
}

pub fn histogram(img: &GrayRaster) -> IntensityHistogram {
    let mut bins = [0u64; 256];
    for &v in img.values() {
        bins[quantize_bin(v)] += 1;
    }
    IntensityHistogram {
        bins,
        total: img.values().len() as u64,
    }
}

/// BT.601 luminance conversion.
pub fn to_grayscale(img: &ColorRaster) -> GrayRaster {
    let (r, g, b) = (img.channel(0), img.channel(1), img.channel(2));
    let data: Vec<f64> = r
        .iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0))
        .collect();
    GrayRaster::from_raw(img.width(), img.height(), data)
}

/// Reflect-pad an image by `radius` on all sides (mirror without
/// repeating the edge pixel).
pub fn border_extend(img: &GrayRaster, radius: usize) -> Result<GrayRaster> {
    if radius >= img.width().min(img.height()) {
        return Err(Error::DegenerateInput(format!(
            "reflect radius {} too large for {}x{} raster",
            radius,
            img.width(),
            img.height()
        )));
    }
    if radius == 0 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width() + 2 * radius, img.height() + 2 * radius);
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(img.get_reflect(x as isize - radius as isize, y as isize - radius as isize));
        }
    }
    Ok(GrayRaster::from_raw(w, h, data))
}

/// Fold an arbitrary index into [0, n) with reflect-101 semantics.
#[inline]
pub(crate) fn reflect_index(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    // period of the reflection is 2n - 2
    while i < 0 || i >= n {
        if i < 0 {
            i = -i;
        }
        if i >= n {
            i = 2 * n - 2 - i;
        }
    }
    i as usize
}

/// FNV-1a over raw f64 bits; used for pipeline trace checksums.
pub fn checksum_f64(values: &[f64]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}
