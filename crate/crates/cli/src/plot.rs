//! Minimal log-log scatter/line plot rendered straight into a PNG,
//! without a plotting dependency: white canvas, gray axes, red series.

use speed_core::io::save_color;
use speed_core::raster::ColorRaster;
use std::path::Path;

const WIDTH: usize = 640;
const HEIGHT: usize = 480;
const MARGIN: usize = 48;

struct Canvas {
    channels: [Vec<f64>; 3],
}

impl Canvas {
    fn new() -> Self {
        Canvas { channels: std::array::from_fn(|_| vec![1.0; WIDTH * HEIGHT]) }
    }

    fn set(&mut self, x: isize, y: isize, rgb: [f64; 3]) {
        if x < 0 || y < 0 || x >= WIDTH as isize || y >= HEIGHT as isize {
            return;
        }
        for (plane, &v) in self.channels.iter_mut().zip(&rgb) {
            plane[y as usize * WIDTH + x as usize] = v;
        }
    }

    fn line(&mut self, (x0, y0): (isize, isize), (x1, y1): (isize, isize), rgb: [f64; 3]) {
        // Bresenham
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.set(x, y, rgb);
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

    fn marker(&mut self, (x, y): (isize, isize), rgb: [f64; 3]) {
        for dy in -2..=2 {
            for dx in -2..=2 {
                self.set(x + dx, y + dy, rgb);
            }
        }
    }
}

/// Time-vs-pixels plot on log10 axes; points are (pixel count, millis).
pub fn save_loglog_plot(points: &[(f64, f64)], path: &Path) -> speed_core::Result<()> {
    let axis = [0.25, 0.25, 0.25];
    let series = [0.85, 0.1, 0.1];

    let logs: Vec<(f64, f64)> = points.iter().map(|&(p, t)| (p.log10(), t.log10())).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &logs {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    // degenerate single-point ranges still need a nonzero span
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }

    let to_px = |x: f64, y: f64| -> (isize, isize) {
        let fx = (x - x0) / (x1 - x0);
        let fy = (y - y0) / (y1 - y0);
        (
            (MARGIN as f64 + fx * (WIDTH - 2 * MARGIN) as f64) as isize,
            (HEIGHT as f64 - MARGIN as f64 - fy * (HEIGHT - 2 * MARGIN) as f64) as isize,
        )
    };

    let mut canvas = Canvas::new();
    let origin = (MARGIN as isize, (HEIGHT - MARGIN) as isize);
    canvas.line(origin, ((WIDTH - MARGIN) as isize, (HEIGHT - MARGIN) as isize), axis);
    canvas.line(origin, (MARGIN as isize, MARGIN as isize), axis);

    for pair in logs.windows(2) {
        canvas.line(to_px(pair[0].0, pair[0].1), to_px(pair[1].0, pair[1].1), series);
    }
    for &(x, y) in &logs {
        canvas.marker(to_px(x, y), series);
    }

    let img = ColorRaster::new(WIDTH, HEIGHT, canvas.channels)?;
    save_color(&img, path)
}
