//! Procedural covers and reference LSB-replacement stegos for calibration
//! and desk-scale benchmarking.
//!
//! Covers are multi-octave value noise pushed through a simulated camera
//! pipeline: a linear sensor signal with shot noise is quantized to 8 bits
//! and then gamma encoded. Re-quantizing through the gamma curve leaves the
//! comb-shaped histograms that real photographs have.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imageio::{Channel, PixelGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverStyle {
    /// Largest noise lattice spacing in pixels.
    pub base_scale: f64,
    pub octaves: u32,
    /// Amplitude ratio between consecutive octaves.
    pub persistence: f64,
    /// Sensor noise standard deviation in linear 8-bit units.
    pub sensor_noise: f64,
    pub gamma: f64,
}

impl Default for CoverStyle {
    fn default() -> Self {
        Self { base_scale: 64.0, octaves: 5, persistence: 0.55, sensor_noise: 1.2, gamma: 2.2 }
    }
}

struct ValueNoise {
    cells_x: usize,
    lattice: Vec<f64>,
    scale: f64,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, width: usize, height: usize, scale: f64) -> Self {
        let cells_x = (width as f64 / scale).ceil() as usize + 2;
        let cells_y = (height as f64 / scale).ceil() as usize + 2;
        let lattice = (0..cells_x * cells_y).map(|_| rng.gen::<f64>()).collect();
        Self { cells_x, lattice, scale }
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        let (fx, fy) = (x as f64 / self.scale, y as f64 / self.scale);
        let (ix, iy) = (fx as usize, fy as usize);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (tx, ty) = (smooth(fx - ix as f64), smooth(fy - iy as f64));
        let v = |cx: usize, cy: usize| self.lattice[cy * self.cells_x + cx];
        let top = v(ix, iy) * (1.0 - tx) + v(ix + 1, iy) * tx;
        let bottom = v(ix, iy + 1) * (1.0 - tx) + v(ix + 1, iy + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

fn fractal_field(rng: &mut ChaCha8Rng, width: usize, height: usize, style: &CoverStyle) -> Vec<f64> {
    let layers: Vec<(ValueNoise, f64)> = (0..style.octaves)
        .map(|o| {
            let scale = (style.base_scale / 2f64.powi(o as i32)).max(1.0);
            (ValueNoise::new(rng, width, height, scale), style.persistence.powi(o as i32))
        })
        .collect();
    let norm: f64 = layers.iter().map(|(_, a)| a).sum();
    let mut field = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            field.push(layers.iter().map(|(n, a)| a * n.at(x, y)).sum::<f64>() / norm);
        }
    }
    // Stretch to the full [0, 1] range so covers use most of the histogram.
    let (lo, hi) = field.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    let span = (hi - lo).max(1e-9);
    field.iter_mut().for_each(|v| *v = (*v - lo) / span);
    field
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A reproducible natural-looking cover.
pub fn natural_cover(width: usize, height: usize, seed: u64) -> PixelGrid {
    natural_cover_with(width, height, seed, &CoverStyle::default())
}

pub fn natural_cover_with(width: usize, height: usize, seed: u64, style: &CoverStyle) -> PixelGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let luma = fractal_field(&mut rng, width, height, style);
    let tint = [0, 1, 2].map(|_| fractal_field(&mut rng, width, height, &CoverStyle { octaves: 2, ..*style }));
    let gains: [f64; 3] = [0, 1, 2].map(|_| rng.gen_range(0.75..1.0));
    let exposure = rng.gen_range(0.55..0.9);

    let planes = [0usize, 1, 2].map(|c| {
        (0..width * height)
            .map(|i| {
                let lin = exposure * gains[c] * (0.8 * luma[i] + 0.2 * tint[c][i]).powf(style.gamma);
                let lin8 = (lin * 255.0 + style.sensor_noise * gaussian(&mut rng)).round().clamp(0.0, 255.0);
                (255.0 * (lin8 / 255.0).powf(1.0 / style.gamma)).round() as u8
            })
            .collect()
    });
    PixelGrid::from_planes(width, height, planes).expect("planes sized to width * height")
}

/// Classic LSB replacement: each sample of every channel is selected with
/// probability `rate` and its LSB replaced by a random bit.
pub fn lsb_replace(grid: &PixelGrid, rate: f64, seed: u64) -> PixelGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = grid.clone();
    for c in Channel::ALL {
        for v in out.plane_mut(c) {
            if rng.gen::<f64>() < rate {
                *v = (*v & !1) | rng.gen_range(0..=1u8);
            }
        }
    }
    out
}

/// Sequential LSB replacement on every sample: bit `i` of the random
/// message goes to sample `i` of each plane in turn.
pub fn sequential_lsb(grid: &PixelGrid, seed: u64) -> PixelGrid {
    lsb_replace(grid, 1.0, seed)
}

/// Lorem-ipsum style text of roughly `len` bytes.
pub fn filler_text(len: usize) -> Vec<u8> {
    const TEXT: &[u8] = b"Lorem ipsum dolor sit amet, consectetur adipiscing elit, sed do eiusmod tempor \
incididunt ut labore et dolore magna aliqua. Ut enim ad minim veniam, quis nostrud exercitation ullamco \
laboris nisi ut aliquip ex ea commodo consequat. Duis aute irure dolor in reprehenderit in voluptate velit \
esse cillum dolore eu fugiat nulla pariatur. Excepteur sint occaecat cupidatat non proident, sunt in culpa \
qui officia deserunt mollit anim id est laborum. ";
    TEXT.iter().copied().cycle().take(len).collect()
}
