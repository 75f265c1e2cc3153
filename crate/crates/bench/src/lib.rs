//! Deterministic input generators shared by the criterion benchmarks.

use speed_core::raster::{ColorRaster, EdgeMap, GrayRaster};

fn lcg(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

/// Square color raster mixing smooth gradients, a blocky object, and
/// deterministic noise — enough structure to exercise every stage.
pub fn sample_image(size: usize) -> ColorRaster {
    let mut state = 0x5EED_u64;
    let channels: [Vec<f64>; 3] = std::array::from_fn(|c| {
        let mut state_c = state.wrapping_add(c as u64);
        (0..size * size)
            .map(|i| {
                let (x, y) = ((i % size) as f64, (i / size) as f64);
                let ramp = 0.3 + 0.4 * (x + y) / (2.0 * size as f64);
                let object = if x > size as f64 * 0.3
                    && x < size as f64 * 0.6
                    && y > size as f64 * 0.2
                    && y < size as f64 * 0.7
                {
                    -0.2
                } else {
                    0.0
                };
                (ramp + object + 0.05 * (lcg(&mut state_c) - 0.5)).clamp(0.0, 1.0)
            })
            .collect()
    });
    let _ = lcg(&mut state);
    ColorRaster::new(size, size, channels).unwrap()
}

pub fn sample_gray(size: usize) -> GrayRaster {
    speed_core::to_grayscale(&sample_image(size))
}

pub fn sample_edges(size: usize, density: f64) -> EdgeMap {
    let mut state = 0xED6E_u64;
    let data = (0..size * size).map(|_| (lcg(&mut state) < density) as u8).collect();
    EdgeMap::new(size, size, data).unwrap()
}
