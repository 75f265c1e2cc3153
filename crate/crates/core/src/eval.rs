//! SSIM-based edge scoring: ground-truth rasterization from polygon
//! annotations, the pixel-wise SSIM map, the binarized matching map, and
//! the ground-truth-normalized TP/FP scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{reflect_index, EdgeMap};

/// Quadrilateral (or general polygon) object annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonAnnotation {
    pub vertices: Vec<(f64, f64)>,
    pub category: String,
    pub difficult: bool,
}

impl PolygonAnnotation {
    pub fn new(vertices: Vec<(f64, f64)>, category: impl Into<String>, difficult: bool) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateInput(
                "polygon annotation needs at least 3 vertices".into(),
            ));
        }
        Ok(Self {
            vertices,
            category: category.into(),
            difficult,
        })
    }
}

/// Per-pixel structural similarity scores in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SsimMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SsimMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Mean TP/FP over a corpus or a single image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    /// Fraction of ground-truth edge pixels matched, in [0, 1].
    pub tp: f64,
    /// Unmatched predicted pixels per ground-truth pixel; not bounded by 1.
    pub fp: f64,
}

/// SSIM window parameters. The defaults follow the reference SSIM
/// formulation: 11x11 Gaussian window (sigma 1.5) and stabilizers
/// (0.01)^2 and (0.03)^2 for dynamic range 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
        }
    }
}

/// Bresenham line rasterization between two lattice points, inclusive.
fn draw_line(map: &mut EdgeMap, x0: i64, y0: i64, x1: i64, y1: i64) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (x0, y0);
    loop {
        if x >= 0 && y >= 0 && (x as usize) < map.width() && (y as usize) < map.height() {
            map.set(x as usize, y as usize, 1);
        }
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Draw 1-pixel polygon outlines; overlapping outlines union.
pub fn rasterize_ground_truth(
    annotations: &[PolygonAnnotation],
    width: usize,
    height: usize,
) -> Result<EdgeMap> {
    let mut map = EdgeMap::zeros(width, height)?;
    let clamp = |v: f64, hi: usize| (v.round().max(0.0) as i64).min(hi as i64 - 1);
    for ann in annotations {
        let pts: Vec<(i64, i64)> = ann
            .vertices
            .iter()
            .map(|&(x, y)| (clamp(x, width), clamp(y, height)))
            .collect();
        for i in 0..pts.len() {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % pts.len()];
            draw_line(&mut map, x0, y0, x1, y1);
        }
    }
    Ok(map)
}

fn gaussian_window(params: &SsimParams) -> Vec<f64> {
    let r = (params.window / 2) as isize;
    let mut k = Vec::with_capacity(params.window);
    let mut sum = 0.0;
    for d in -r..=r {
        let w = (-(d * d) as f64 / (2.0 * params.sigma * params.sigma)).exp();
        k.push(w);
        sum += w;
    }
    for w in &mut k {
        *w /= sum;
    }
    k
}

/// Separable Gaussian-weighted local mean with reflected borders.
fn windowed_mean(data: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &kw) in kernel.iter().enumerate() {
                let sx = reflect_index(x as isize + i as isize - r, w);
                acc += kw * data[y * w + sx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &kw) in kernel.iter().enumerate() {
                let sy = reflect_index(y as isize + i as isize - r, h);
                acc += kw * tmp[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Pixel-wise SSIM between two binary edge maps.
pub fn ssim_map_with(g: &EdgeMap, d: &EdgeMap, params: &SsimParams) -> Result<SsimMap> {
    if g.width() != d.width() || g.height() != d.height() {
        return Err(Error::DimensionMismatch(
            g.width(),
            g.height(),
            d.width(),
            d.height(),
        ));
    }
    let (w, h) = (g.width(), g.height());
    let a: Vec<f64> = g.values().iter().map(|&v| v as f64).collect();
    let b: Vec<f64> = d.values().iter().map(|&v| v as f64).collect();
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();

    let kernel = gaussian_window(params);
    let mu_a = windowed_mean(&a, w, h, &kernel);
    let mu_b = windowed_mean(&b, w, h, &kernel);
    let m_aa = windowed_mean(&aa, w, h, &kernel);
    let m_bb = windowed_mean(&bb, w, h, &kernel);
    let m_ab = windowed_mean(&ab, w, h, &kernel);

    let c1 = (params.k1 * 1.0f64).powi(2);
    let c2 = (params.k2 * 1.0f64).powi(2);
    let mut values = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let va = m_aa[i] - mu_a[i] * mu_a[i];
        let vb = m_bb[i] - mu_b[i] * mu_b[i];
        let cov = m_ab[i] - mu_a[i] * mu_b[i];
        let s = ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2))
            / ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
        values.push(s.clamp(-1.0, 1.0));
    }
    Ok(SsimMap { width: w, height: h, values })
}

pub fn ssim_map(g: &EdgeMap, d: &EdgeMap) -> Result<SsimMap> {
    ssim_map_with(g, d, &SsimParams::default())
}

/// Binarize an SSIM map: 1 where the score is strictly positive.
pub fn matching_map(ssim: &SsimMap) -> EdgeMap {
    let data: Vec<u8> = ssim.values().iter().map(|&v| (v > 0.0) as u8).collect();
    EdgeMap::new(ssim.width(), ssim.height(), data).expect("matching map dimensions")
}

/// Fraction of ground-truth pixels covered by the matching map.
pub fn tp_score(m: &EdgeMap, g: &EdgeMap) -> Result<f64> {
    check_dims(m, g)?;
    let total = g.count_ones();
    if total == 0 {
        return Err(Error::UndefinedScore);
    }
    let matched: u64 = m
        .values()
        .iter()
        .zip(g.values())
        .map(|(&mv, &gv)| (mv & gv) as u64)
        .sum();
    Ok(matched as f64 / total as f64)
}

/// Predicted pixels outside the matching map, per ground-truth pixel.
pub fn fp_score(m: &EdgeMap, d: &EdgeMap, g: &EdgeMap) -> Result<f64> {
    check_dims(m, d)?;
    check_dims(m, g)?;
    let total = g.count_ones();
    if total == 0 {
        return Err(Error::UndefinedScore);
    }
    let unmatched: u64 = m
        .values()
        .iter()
        .zip(d.values())
        .map(|(&mv, &dv)| ((1 - mv) & dv) as u64)
        .sum();
    Ok(unmatched as f64 / total as f64)
}

fn check_dims(a: &EdgeMap, b: &EdgeMap) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

/// Score a single predicted map against ground truth.
pub fn score_prediction(predicted: &EdgeMap, truth: &EdgeMap) -> Result<ScorePair> {
    let ssim = ssim_map(truth, predicted)?;
    let m = matching_map(&ssim);
    Ok(ScorePair {
        tp: tp_score(&m, truth)?,
        fp: fp_score(&m, predicted, truth)?,
    })
}

/// Unweighted per-image mean over pairs with non-empty ground truth.
/// Errors when every image is skipped.
pub fn evaluate_corpus(pairs: &[(EdgeMap, EdgeMap)]) -> Result<ScorePair> {
    let mut tp_sum = 0.0;
    let mut fp_sum = 0.0;
    let mut n = 0usize;
    for (predicted, truth) in pairs {
        if truth.count_ones() == 0 {
            continue;
        }
        let score = score_prediction(predicted, truth)?;
        tp_sum += score.tp;
        fp_sum += score.fp;
        n += 1;
    }
    if n == 0 {
        return Err(Error::UndefinedScore);
    }
    Ok(ScorePair {
        tp: tp_sum / n as f64,
        fp: fp_sum / n as f64,
    })
}

/// Parse DOTA-style annotation text: lines of
/// `x1 y1 x2 y2 x3 y3 x4 y4 category difficulty`, with header lines
/// (imagesource, gsd, ...) tolerated and skipped.
pub fn parse_annotations(text: &str) -> Vec<PolygonAnnotation> {
    let mut out = Vec::new();
    for line in text.lines() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 10 {
            continue;
        }
        let coords: Option<Vec<f64>> = fields[..8].iter().map(|f| f.parse().ok()).collect();
        let Some(coords) = coords else { continue };
        let difficult = fields[9] == "1";
        let vertices = coords.chunks(2).map(|c| (c[0], c[1])).collect();
        out.push(PolygonAnnotation {
            vertices,
            category: fields[8].to_string(),
            difficult,
        });
    }
    out
}
