//! The seven pre-processing stages: white balance, anisotropic diffusion,
//! conditional contrast normalization, fuzzy histogram hyperbolization,
//! median blur, Gaussian blur, and conditional Gaussian blur.
//!
//! Every filter is a pure function from [0,1]-rasters to [0,1]-rasters of
//! the same dimensions.

use serde::{Deserialize, Serialize};

use crate::canny::noise_estimate;
use crate::error::{Error, Result};
use crate::raster::{histogram, ColorRaster, GrayRaster};

/// How the edge-stopping scale K of the diffusion coefficient is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMode {
    /// Use the configured `k` value as-is.
    Fixed,
    /// Estimate K from the image with the robust gradient noise scale.
    CannyNoiseEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionParams {
    pub iterations: u32,
    /// Explicit step size; must stay in (0, 0.25] for the 4-neighbor scheme.
    pub time_step: f64,
    /// Edge-stopping scale, used when `k_mode` is `Fixed`.
    pub k: f64,
    pub k_mode: KMode,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            iterations: 10,
            time_step: 0.25,
            k: 0.1,
            k_mode: KMode::CannyNoiseEstimate,
        }
    }
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_step > 0.0 && self.time_step <= 0.25) {
            return Err(Error::InvalidConfig(format!(
                "diffusion time_step {} outside (0, 0.25]",
                self.time_step
            )));
        }
        if !(self.k > 0.0) {
            return Err(Error::InvalidConfig("diffusion K must be positive".into()));
        }
        Ok(())
    }
}

/// Thresholds governing the two conditional stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditionalTriggerParams {
    /// Fraction of the 256-bin range treated as the upper/lower tail.
    pub skew_tail_fraction: f64,
    /// Tail mass ratio above which contrast normalization fires.
    pub skew_ratio_threshold: f64,
    /// Intensity shift applied on a skew trigger.
    pub shift_factor: f64,
    /// Interpret `shift_factor` multiplicatively instead of additively.
    pub shift_multiplicative: bool,
    /// A non-empty bin is "sparse" when it holds at most this fraction of pixels.
    pub sparse_bin_fraction: f64,
    /// Secondary blur fires when sparse bins exceed this fraction of the counted bins.
    pub sparse_bin_trigger: f64,
    /// Count the sparse-bin fraction against all 256 bins instead of non-empty ones.
    pub sparse_all_bins: bool,
}

impl Default for ConditionalTriggerParams {
    fn default() -> Self {
        Self {
            skew_tail_fraction: 0.10,
            skew_ratio_threshold: 2.0,
            shift_factor: 0.20,
            shift_multiplicative: false,
            sparse_bin_fraction: 0.0001,
            sparse_bin_trigger: 0.10,
            sparse_all_bins: false,
        }
    }
}

impl ConditionalTriggerParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("skew_tail_fraction", self.skew_tail_fraction),
            ("shift_factor", self.shift_factor),
            ("sparse_bin_fraction", self.sparse_bin_fraction),
            ("sparse_bin_trigger", self.sparse_bin_trigger),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} {v} outside (0, 1)")));
            }
        }
        if !(self.skew_ratio_threshold > 1.0) {
            return Err(Error::InvalidConfig(
                "skew_ratio_threshold must exceed 1".into(),
            ));
        }
        Ok(())
    }
}

/// Gray-world white balancing: scale each channel so the channel means meet
/// at their common average, then clip to [0, 1].
///
/// Returns the balanced image and whether balancing was applied; a channel
/// with zero mean is degenerate and leaves the image unchanged.
pub fn white_balance(img: &ColorRaster) -> (ColorRaster, bool) {
    let means = [img.channel_mean(0), img.channel_mean(1), img.channel_mean(2)];
    if means.iter().any(|&m| m == 0.0) {
        return (img.clone(), false);
    }
    let target = (means[0] + means[1] + means[2]) / 3.0;
    let mut channels: [Vec<f64>; 3] = Default::default();
    for c in 0..3 {
        let gain = target / means[c];
        channels[c] = img
            .channel(c)
            .iter()
            .map(|&v| (v * gain).clamp(0.0, 1.0))
            .collect();
    }
    (
        ColorRaster::from_raw(img.width(), img.height(), channels),
        true,
    )
}

/// Perona-Malik edge-preserving smoothing.
///
/// Explicit 4-neighbor scheme with zero-flux boundaries; the conduction
/// coefficient exp(-(d/K)^2) is evaluated per directional difference.
pub fn anisotropic_diffusion(img: &GrayRaster, params: &DiffusionParams) -> Result<GrayRaster> {
    params.validate()?;
    let k = match params.k_mode {
        KMode::Fixed => params.k,
        KMode::CannyNoiseEstimate => {
            let est = noise_estimate(img);
            // constant or near-constant images give a zero estimate; fall
            // back to the fixed value so the conduction stays defined
            if est > 0.0 {
                est
            } else {
                params.k
            }
        }
    };
    let (w, h) = (img.width(), img.height());
    let mut cur = img.values().to_vec();
    let mut next = vec![0.0f64; w * h];
    let inv_k2 = 1.0 / (k * k);
    let dt = params.time_step;

    for _ in 0..params.iterations {
        for y in 0..h {
            for x in 0..w {
                let idx = y * w + x;
                let v = cur[idx];
                let mut flux = 0.0;
                // zero-flux boundary: missing neighbors contribute nothing
                if x > 0 {
                    let d = cur[idx - 1] - v;
                    flux += (-d * d * inv_k2).exp() * d;
                }
                if x + 1 < w {
                    let d = cur[idx + 1] - v;
                    flux += (-d * d * inv_k2).exp() * d;
                }
                if y > 0 {
                    let d = cur[idx - w] - v;
                    flux += (-d * d * inv_k2).exp() * d;
                }
                if y + 1 < h {
                    let d = cur[idx + w] - v;
                    flux += (-d * d * inv_k2).exp() * d;
                }
                let nv = v + dt * flux;
                if !nv.is_finite() {
                    return Err(Error::NumericInstability);
                }
                next[idx] = nv;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    for v in &mut cur {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(GrayRaster::from_raw(w, h, cur))
}

/// Diagnostics and result of the conditional contrast normalization stage.
#[derive(Debug, Clone)]
pub struct ContrastOutcome {
    pub image: GrayRaster,
    pub applied: bool,
    /// Mass ratio of the dominant tail over the opposite tail
    /// (infinite when the opposite tail is empty).
    pub skew_ratio: f64,
}

/// Dual-sided contrast normalization, applied only when the intensity
/// histogram is strongly skewed toward one end.
///
/// On a trigger the intensities are shifted away from the heavy tail by
/// `shift_factor` and the shifted range is stretched back onto [0, 1].
/// `force` bypasses the trigger but keeps the skew-directed shift.
pub fn conditional_contrast_normalization(
    img: &GrayRaster,
    params: &ConditionalTriggerParams,
    force: bool,
) -> ContrastOutcome {
    let hist = histogram(img);
    let tail_bins = ((256.0 * params.skew_tail_fraction).round() as usize).clamp(1, 128);
    let lower: u64 = hist.bins()[..tail_bins].iter().sum();
    let upper: u64 = hist.bins()[256 - tail_bins..].iter().sum();

    let (ratio, shift_down) = if upper >= lower {
        (
            if lower == 0 {
                if upper == 0 { 0.0 } else { f64::INFINITY }
            } else {
                upper as f64 / lower as f64
            },
            true,
        )
    } else {
        (
            if upper == 0 { f64::INFINITY } else { lower as f64 / upper as f64 },
            false,
        )
    };

    let triggered = ratio > params.skew_ratio_threshold;
    if !(triggered || (force && ratio > 0.0)) {
        return ContrastOutcome {
            image: img.clone(),
            applied: false,
            skew_ratio: ratio,
        };
    }

    let shifted: Vec<f64> = if params.shift_multiplicative {
        let gain = if shift_down {
            1.0 - params.shift_factor
        } else {
            1.0 + params.shift_factor
        };
        img.values().iter().map(|&v| v * gain).collect()
    } else {
        let delta = if shift_down { -params.shift_factor } else { params.shift_factor };
        img.values().iter().map(|&v| v + delta).collect()
    };

    let lo = shifted.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = shifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let image = if hi > lo {
        let range = hi - lo;
        GrayRaster::from_raw(
            img.width(),
            img.height(),
            shifted.iter().map(|&v| ((v - lo) / range).clamp(0.0, 1.0)).collect(),
        )
    } else {
        img.clone()
    };
    ContrastOutcome {
        image,
        applied: true,
        skew_ratio: ratio,
    }
}

/// Fuzzy histogram hyperbolization: monotone exponential remap that
/// stretches dark-end contrast, mapping g_min to 0 and g_max to 1.
///
/// `buckets` is the histogram bucket count L (256 by default); the output
/// is scaled back from [0, L-1] into [0, 1]. Constant images are returned
/// unchanged since the membership function is undefined.
pub fn fuzzy_histogram_hyperbolization(img: &GrayRaster, buckets: u32) -> GrayRaster {
    debug_assert!(buckets >= 2);
    let (g_min, g_max) = img.min_max();
    if g_max <= g_min {
        return img.clone();
    }
    let inv_range = 1.0 / (g_max - g_min);
    // lambda = (L-1)/(e^{-1}-1) is negative; dividing the transfer output
    // by (L-1) cancels L entirely, leaving (e^{-mu}-1)/(e^{-1}-1)
    let denom = (-1.0f64).exp() - 1.0;
    let data: Vec<f64> = img
        .values()
        .iter()
        .map(|&g| {
            let mu = (g - g_min) * inv_range;
            ((((-mu).exp() - 1.0) / denom).clamp(0.0, 1.0)) as f64
        })
        .collect();
    GrayRaster::from_raw(img.width(), img.height(), data)
}

/// 3x3 median blur with reflected borders.
pub fn median_blur(img: &GrayRaster) -> GrayRaster {
    let (w, h) = (img.width(), img.height());
    let mut data = Vec::with_capacity(w * h);
    let mut window = [0.0f64; 9];
    for y in 0..h {
        for x in 0..w {
            let mut i = 0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    window[i] = img.get_reflect(x as isize + dx, y as isize + dy);
                    i += 1;
                }
            }
            window.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            data.push(window[4]);
        }
    }
    GrayRaster::from_raw(w, h, data)
}

/// The 3x3 Gaussian kernel with sigma 1.5, renormalized to sum to 1.
pub fn gaussian_kernel_3x3() -> [f64; 9] {
    let sigma = 1.5f64;
    let mut kernel = [0.0f64; 9];
    let mut sum = 0.0;
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            let w = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
            kernel[((dy + 1) * 3 + (dx + 1)) as usize] = w;
            sum += w;
        }
    }
    for w in &mut kernel {
        *w /= sum;
    }
    kernel
}

/// 3x3 Gaussian blur (sigma 1.5) with reflected borders.
pub fn gaussian_blur(img: &GrayRaster) -> GrayRaster {
    let kernel = gaussian_kernel_3x3();
    let (w, h) = (img.width(), img.height());
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            let mut i = 0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    acc += kernel[i] * img.get_reflect(x as isize + dx, y as isize + dy);
                    i += 1;
                }
            }
            data.push(acc.clamp(0.0, 1.0));
        }
    }
    GrayRaster::from_raw(w, h, data)
}

/// Diagnostics and result of the conditional secondary blur.
#[derive(Debug, Clone)]
pub struct BlurOutcome {
    pub image: GrayRaster,
    pub applied: bool,
    /// Sparse bins over counted bins, the quantity tested against the trigger.
    pub sparse_fraction: f64,
}

/// Secondary Gaussian blur, fired when the histogram still holds many
/// barely occupied bins (a proxy for residual small variances).
pub fn conditional_gaussian_blur(
    img: &GrayRaster,
    params: &ConditionalTriggerParams,
    force: bool,
) -> BlurOutcome {
    let hist = histogram(img);
    let cutoff = params.sparse_bin_fraction * hist.total() as f64;
    let sparse = hist
        .bins()
        .iter()
        .filter(|&&c| c > 0 && (c as f64) <= cutoff)
        .count();
    let denom = if params.sparse_all_bins { 256 } else { hist.non_empty() };
    let fraction = if denom == 0 { 0.0 } else { sparse as f64 / denom as f64 };
    let applied = force || fraction > params.sparse_bin_trigger;
    BlurOutcome {
        image: if applied { gaussian_blur(img) } else { img.clone() },
        applied,
        sparse_fraction: fraction,
    }
}
