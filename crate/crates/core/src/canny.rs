//! Canny edge detection (Sobel gradients, 4-direction non-maximum
//! suppression, double-threshold hysteresis) plus the robust gradient
//! noise estimator shared with the diffusion filter.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::raster::{EdgeMap, GrayRaster};

/// How thresholds are derived when none are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutoMode {
    /// High threshold from Otsu over nonzero gradient magnitudes, low = 0.4 * high.
    OtsuDerived,
    /// High threshold from the gradient noise scale, low = 0.4 * high.
    NoiseDerived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CannyParams {
    /// Fixed (low, high) gradient-magnitude thresholds; `None` selects auto mode.
    pub thresholds: Option<(f64, f64)>,
    pub auto_mode: AutoMode,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            thresholds: None,
            auto_mode: AutoMode::OtsuDerived,
        }
    }
}

impl CannyParams {
    pub fn fixed(low: f64, high: f64) -> Self {
        Self {
            thresholds: Some((low, high)),
            auto_mode: AutoMode::OtsuDerived,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((low, high)) = self.thresholds {
            if !(low > 0.0 && low < high) {
                return Err(Error::InvalidConfig(format!(
                    "canny thresholds must satisfy 0 < low < high, got ({low}, {high})"
                )));
            }
        }
        Ok(())
    }
}

/// Robust noise scale: 1.4826 times the median 4-neighbor gradient
/// magnitude. Zero on a constant image.
pub fn noise_estimate(img: &GrayRaster) -> f64 {
    let (w, h) = (img.width(), img.height());
    if w < 2 || h < 2 {
        return 0.0;
    }
    let mut mags = Vec::with_capacity((w - 1) * (h - 1));
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            let v = img.get(x, y);
            let dx = img.get(x + 1, y) - v;
            let dy = img.get(x, y + 1) - v;
            mags.push((dx * dx + dy * dy).sqrt());
        }
    }
    mags.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = mags.len();
    let median = if n % 2 == 1 {
        mags[n / 2]
    } else {
        0.5 * (mags[n / 2 - 1] + mags[n / 2])
    };
    1.4826 * median
}

/// Sobel gradient magnitude, normalized so a unit step edge peaks at 0.5.
pub fn sobel_magnitude(img: &GrayRaster) -> Vec<f64> {
    let (gx, gy) = sobel_gradients(img);
    gx.iter()
        .zip(&gy)
        .map(|(&x, &y)| (x * x + y * y).sqrt())
        .collect()
}

fn sobel_gradients(img: &GrayRaster) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (img.width(), img.height());
    let mut gx = Vec::with_capacity(w * h);
    let mut gy = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| img.get_reflect(x as isize + dx, y as isize + dy);
            // 1/8 normalization keeps magnitudes in intensity units
            let sx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1) - p(-1, -1) - 2.0 * p(-1, 0) - p(-1, 1)) / 8.0;
            let sy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1) - p(-1, -1) - 2.0 * p(0, -1) - p(1, -1)) / 8.0;
            gx.push(sx);
            gy.push(sy);
        }
    }
    (gx, gy)
}

/// Quantize a gradient direction into one of four sectors and return the
/// two neighbor offsets along it. Sector boundaries sit at 22.5-degree
/// offsets from the axes.
fn direction_neighbors(gx: f64, gy: f64) -> ((isize, isize), (isize, isize)) {
    let angle = gy.atan2(gx).to_degrees();
    // fold into [0, 180)
    let a = if angle < 0.0 { angle + 180.0 } else { angle };
    if !(22.5..157.5).contains(&a) {
        ((-1, 0), (1, 0)) // horizontal gradient: compare left/right
    } else if a < 67.5 {
        ((-1, -1), (1, 1)) // 45 degrees
    } else if a < 112.5 {
        ((0, -1), (0, 1)) // vertical gradient: compare up/down
    } else {
        ((-1, 1), (1, -1)) // 135 degrees
    }
}

fn non_maximum_suppression(mag: &[f64], gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    let at = |x: isize, y: isize| -> f64 {
        let xi = crate::raster::reflect_index(x, w);
        let yi = crate::raster::reflect_index(y, h);
        mag[yi * w + xi]
    };
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            let m = mag[idx];
            if m == 0.0 {
                continue;
            }
            let ((ax, ay), (bx, by)) = direction_neighbors(gx[idx], gy[idx]);
            let before = at(x as isize + ax, y as isize + ay);
            let after = at(x as isize + bx, y as isize + by);
            // strict against one side, non-strict against the other, so a
            // two-pixel plateau keeps exactly one pixel
            if m > before && m >= after {
                out[idx] = m;
            }
        }
    }
    out
}

/// Otsu threshold computed over the nonzero entries of `values`,
/// quantized to 256 levels of their maximum. Returns `None` when no
/// nonzero values exist.
fn otsu_nonzero(values: &[f64]) -> Option<f64> {
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return None;
    }
    let mut hist = [0u64; 256];
    let mut total = 0u64;
    for &v in values {
        if v > 0.0 {
            let bin = ((v / max) * 255.0).round() as usize;
            hist[bin.min(255)] += 1;
            total += 1;
        }
    }
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let mut w0 = 0u64;
    let mut sum0 = 0.0f64;
    let mut best = (0.0f64, 0usize);
    for t in 0..256 {
        w0 += hist[t];
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        sum0 += t as f64 * hist[t] as f64;
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if between > best.0 {
            best = (between, t);
        }
    }
    Some(best.1 as f64 / 255.0 * max)
}

fn resolve_thresholds(img: &GrayRaster, mag: &[f64], params: &CannyParams) -> Option<(f64, f64)> {
    if let Some(t) = params.thresholds {
        return Some(t);
    }
    let high = match params.auto_mode {
        AutoMode::OtsuDerived => otsu_nonzero(mag)?,
        AutoMode::NoiseDerived => {
            let scale = noise_estimate(img);
            if scale > 0.0 {
                2.5 * scale
            } else {
                return None;
            }
        }
    };
    if high <= 0.0 {
        return None;
    }
    Some((0.4 * high, high))
}

/// Full Canny detection. Every retained pixel has gradient magnitude at
/// least `low` and is 8-connected through retained pixels to a pixel at
/// least `high`.
pub fn canny_detect(img: &GrayRaster, params: &CannyParams) -> Result<EdgeMap> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::DegenerateInput(format!(
            "canny requires at least 3x3 input, got {w}x{h}"
        )));
    }
    let (gx, gy) = sobel_gradients(img);
    let mag: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .map(|(&x, &y)| (x * x + y * y).sqrt())
        .collect();

    let Some((low, high)) = resolve_thresholds(img, &mag, params) else {
        // auto thresholding on a constant image: nothing to detect
        return EdgeMap::zeros(w, h);
    };

    let nms = non_maximum_suppression(&mag, &gx, &gy, w, h);

    // hysteresis: flood from strong pixels across weak ones (set semantics,
    // so traversal order cannot change the result)
    let mut out = vec![0u8; w * h];
    let mut queue = VecDeque::new();
    for (idx, &m) in nms.iter().enumerate() {
        if m >= high {
            out[idx] = 1;
            queue.push_back(idx);
        }
    }
    while let Some(idx) = queue.pop_front() {
        let (x, y) = (idx % w, idx / w);
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let nidx = ny as usize * w + nx as usize;
                if out[nidx] == 0 && nms[nidx] >= low {
                    out[nidx] = 1;
                    queue.push_back(nidx);
                }
            }
        }
    }
    EdgeMap::new(w, h, out)
}
