//! Synthetic annotated aerial-style test corpus.
//!
//! Each image combines the failure modes the pipeline targets: colored
//! haze, sensor noise, small high-contrast clutter (cars, trees), faint
//! low-contrast objects inside dark regions, and occasional specular
//! glare. Objects carry loose bounding-quad annotations the way aerial
//! datasets do, so predicted silhouette edges never coincide exactly
//! with the ground-truth outlines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speed_core::eval::{rasterize_ground_truth, PolygonAnnotation};
use speed_core::pipeline::CorpusItem;
use speed_core::raster::ColorRaster;

pub struct SynthImage {
    pub item: CorpusItem,
    #[allow(dead_code)] // consumed only by some test binaries
    pub annotations: Vec<PolygonAnnotation>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Rotated rectangle corners around a center, in winding order.
fn quad_corners(cx: f64, cy: f64, a: f64, b: f64, angle: f64) -> Vec<(f64, f64)> {
    let (s, c) = angle.sin_cos();
    [(-a, -b), (a, -b), (a, b), (-a, b)]
        .iter()
        .map(|&(dx, dy)| (cx + dx * c - dy * s, cy + dx * s + dy * c))
        .collect()
}

fn inside_convex(pt: (f64, f64), corners: &[(f64, f64)]) -> bool {
    let mut sign = 0.0f64;
    for i in 0..corners.len() {
        let (x0, y0) = corners[i];
        let (x1, y1) = corners[(i + 1) % corners.len()];
        let cross = (x1 - x0) * (pt.1 - y0) - (y1 - y0) * (pt.0 - x0);
        if cross.abs() < 1e-12 {
            continue;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}

/// Ellipse inscribed in the rotated rect (cx, cy, a, b, angle).
fn inside_ellipse(pt: (f64, f64), cx: f64, cy: f64, a: f64, b: f64, angle: f64) -> bool {
    let (s, c) = angle.sin_cos();
    let dx = pt.0 - cx;
    let dy = pt.1 - cy;
    let u = dx * c + dy * s;
    let v = -dx * s + dy * c;
    (u / a).powi(2) + (v / b).powi(2) <= 1.0
}

struct ObjectShape {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    angle: f64,
    ellipse: bool,
}

fn fill_object(gray: &mut [f64], size: usize, shape: &ObjectShape, corners: &[(f64, f64)], value: f64) {
    let xs: Vec<f64> = corners.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = corners.iter().map(|p| p.1).collect();
    let x0 = xs.iter().cloned().fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
    let x1 = (xs.iter().cloned().fold(0.0, f64::max).ceil() as usize).min(size - 1);
    let y0 = ys.iter().cloned().fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
    let y1 = (ys.iter().cloned().fold(0.0, f64::max).ceil() as usize).min(size - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let pt = (x as f64, y as f64);
            let inside = if shape.ellipse {
                inside_ellipse(pt, shape.cx, shape.cy, shape.a, shape.b, shape.angle)
            } else {
                inside_convex(pt, corners)
            };
            if inside {
                gray[y * size + x] = value;
            }
        }
    }
}

pub fn synth_image(seed: u64, size: usize) -> SynthImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15));
    let n = size * size;

    // smooth background
    let fx = rng.gen_range(1.0..3.0);
    let fy = rng.gen_range(1.0..3.0);
    let (px, py) = (rng.gen_range(0.0..6.28), rng.gen_range(0.0..6.28));
    let mut gray: Vec<f64> = (0..n)
        .map(|i| {
            let (x, y) = ((i % size) as f64, (i / size) as f64);
            0.42 + 0.06
                * (fx * 6.28 * x / size as f64 + px).cos()
                * (fy * 6.28 * y / size as f64 + py).cos()
        })
        .collect();

    // dark region (shadow / water): one side of the image at low intensity
    let dark_vertical = rng.gen_bool(0.5);
    let dark_start = rng.gen_range(0..size / 2);
    let dark_len = size / 2;
    let in_dark = |x: usize, y: usize| {
        let c = if dark_vertical { x } else { y };
        c >= dark_start && c < dark_start + dark_len
    };
    for y in 0..size {
        for x in 0..size {
            if in_dark(x, y) {
                gray[y * size + x] *= 0.30;
            }
        }
    }

    // occasional glare blob, drawn under the objects
    if rng.gen_bool(0.3) {
        let (gx, gy) = (rng.gen_range(0..size) as f64, rng.gen_range(0..size) as f64);
        let r = rng.gen_range(size as f64 / 7.0..size as f64 / 4.0);
        for y in 0..size {
            for x in 0..size {
                let d2 = (x as f64 - gx).powi(2) + (y as f64 - gy).powi(2);
                if d2 < r * r {
                    gray[y * size + x] = 0.95;
                }
            }
        }
    }

    // annotated objects: strong ones anywhere, faint ones in the dark
    // region; the annotation is always the loose bounding quad even when
    // the drawn silhouette is an ellipse
    let mut annotations = Vec::new();
    let n_objects = rng.gen_range(10..15);
    for k in 0..n_objects {
        let faint = k % 4 == 3;
        let (cx, cy) = loop {
            let cx = rng.gen_range(8.0..size as f64 - 8.0);
            let cy = rng.gen_range(8.0..size as f64 - 8.0);
            if in_dark(cx as usize, cy as usize) == faint {
                break (cx, cy);
            }
        };
        let a = rng.gen_range(4.0..11.0);
        let b = rng.gen_range(4.0..11.0);
        let angle = rng.gen_range(0.0..1.57);
        let shape = ObjectShape {
            cx,
            cy,
            a,
            b,
            angle,
            ellipse: !faint && rng.gen_bool(0.5),
        };
        let corners = quad_corners(cx, cy, a, b, angle);
        let local_bg = gray[cy as usize * size + cx as usize];
        let delta = if faint {
            rng.gen_range(0.12..0.16)
        } else {
            rng.gen_range(0.30..0.45)
        };
        let value = if local_bg > 0.5 { local_bg - delta } else { local_bg + delta };
        fill_object(&mut gray, size, &shape, &corners, value.clamp(0.02, 0.98));
        annotations.push(PolygonAnnotation::new(corners, if faint { "faint" } else { "strong" }, faint).unwrap());
    }

    // unannotated clutter: cars, trees, rooftop furniture
    let n_speckles = size * size / 25;
    for _ in 0..n_speckles {
        let x = rng.gen_range(0..size);
        let y = rng.gen_range(0..size);
        let v = gray[y * size + x];
        let d = rng.gen_range(0.20..0.35);
        gray[y * size + x] = (if v > 0.5 { v - d } else { v + d }).clamp(0.0, 1.0);
    }

    // band-limited texture noise (vegetation, soil): survives small blur
    // kernels, unlike per-pixel sensor noise
    let texture_sigma = 0.24;
    let mut texture: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    for _ in 0..2 {
        let src = texture.clone();
        for y in 0..size {
            for x in 0..size {
                let mut acc = 0.0;
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let sx = (x as isize + dx).clamp(0, size as isize - 1) as usize;
                        let sy = (y as isize + dy).clamp(0, size as isize - 1) as usize;
                        acc += src[sy * size + sx];
                    }
                }
                texture[y * size + x] = acc / 9.0;
            }
        }
    }
    // renormalize the smoothed field back to unit variance, then apply
    // multiplicatively so texture amplitude tracks local brightness
    let tex_rms = (texture.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    for (g, t) in gray.iter_mut().zip(&texture) {
        *g = (*g * (1.0 + t / tex_rms * texture_sigma)).clamp(0.0, 1.0);
    }

    // colored haze and per-channel sensor noise
    let haze = rng.gen_range(0.08..0.22);
    let gains = [
        1.0,
        rng.gen_range(0.85..0.98),
        rng.gen_range(0.75..0.92),
    ];
    let noise_sigma = 0.04;
    let mut channels: [Vec<f64>; 3] = Default::default();
    for (c, plane) in channels.iter_mut().enumerate() {
        *plane = gray
            .iter()
            .map(|&v| {
                let hazed = v * gains[c] * (1.0 - haze) + haze * gains[c];
                (hazed + normal(&mut rng) * noise_sigma).clamp(0.0, 1.0)
            })
            .collect();
    }

    let image = ColorRaster::new(size, size, channels).unwrap();
    let truth = rasterize_ground_truth(&annotations, size, size).unwrap();
    SynthImage {
        item: CorpusItem { image, truth },
        annotations,
    }
}

pub fn satellite_corpus(seed: u64, count: usize, size: usize) -> Vec<CorpusItem> {
    (0..count)
        .map(|i| synth_image(seed + i as u64, size).item)
        .collect()
}
