//! Image quality and distribution statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imageio::{Channel, PixelGrid};

pub const SSIM_WINDOW: usize = 7;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const SSIM_L: f64 = 255.0;

fn same_dims(a: &PixelGrid, b: &PixelGrid) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

/// Mean squared error pooled over all three channels.
pub fn mse(a: &PixelGrid, b: &PixelGrid) -> Result<f64> {
    same_dims(a, b)?;
    let sum: u64 = a
        .planes()
        .iter()
        .zip(b.planes())
        .flat_map(|(p, q)| p.iter().zip(q))
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / (a.pixel_count() * 3) as f64)
}

/// `10 log10(255^2 / MSE)`; `f64::INFINITY` for identical images.
pub fn psnr(cover: &PixelGrid, stego: &PixelGrid) -> Result<f64> {
    let mse = mse(cover, stego)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// BT.601 luma, `round(0.299 R + 0.587 G + 0.114 B)` with halves rounded up.
pub fn grayscale(grid: &PixelGrid) -> Vec<u8> {
    let [b, g, r] = grid.planes();
    b.iter()
        .zip(g)
        .zip(r)
        .map(|((&b, &g), &r)| {
            let y = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
            ((y + 500) / 1000) as u8
        })
        .collect()
}

/// Mean SSIM of the grayscale images over every 7x7 window that lies fully
/// inside the image, with sample (N-1) variances.
pub fn ssim(cover: &PixelGrid, stego: &PixelGrid) -> Result<f64> {
    same_dims(cover, stego)?;
    let (w, h) = (cover.width(), cover.height());
    if w.min(h) < SSIM_WINDOW {
        return Err(Error::ImageTooSmall { width: w, height: h, required: SSIM_WINDOW });
    }
    Ok(ssim_gray(&grayscale(cover), &grayscale(stego), w, h))
}

/// Summed-area table with one row and column of zero padding.
struct Integral {
    w: usize,
    data: Vec<u64>,
}

impl Integral {
    fn new(w: usize, h: usize, value: impl Fn(usize) -> u64) -> Self {
        let stride = w + 1;
        let mut data = vec![0u64; stride * (h + 1)];
        for r in 0..h {
            let mut row_sum = 0u64;
            for c in 0..w {
                row_sum += value(r * w + c);
                data[(r + 1) * stride + c + 1] = data[r * stride + c + 1] + row_sum;
            }
        }
        Self { w: stride, data }
    }

    fn window(&self, row: usize, col: usize, size: usize) -> u64 {
        let s = self.w;
        let (r0, c0, r1, c1) = (row, col, row + size, col + size);
        self.data[r1 * s + c1] + self.data[r0 * s + c0] - self.data[r0 * s + c1] - self.data[r1 * s + c0]
    }
}

pub(crate) fn ssim_gray(x: &[u8], y: &[u8], w: usize, h: usize) -> f64 {
    let n = SSIM_WINDOW;
    let sx = Integral::new(w, h, |i| u64::from(x[i]));
    let sy = Integral::new(w, h, |i| u64::from(y[i]));
    let sxx = Integral::new(w, h, |i| u64::from(x[i]) * u64::from(x[i]));
    let syy = Integral::new(w, h, |i| u64::from(y[i]) * u64::from(y[i]));
    let sxy = Integral::new(w, h, |i| u64::from(x[i]) * u64::from(y[i]));

    let np = (n * n) as f64;
    let c1 = (SSIM_K1 * SSIM_L).powi(2);
    let c2 = (SSIM_K2 * SSIM_L).powi(2);
    let mut total = 0.0;
    let mut count = 0usize;
    for row in 0..=h - n {
        for col in 0..=w - n {
            let (ax, ay) = (sx.window(row, col, n) as f64, sy.window(row, col, n) as f64);
            let (mx, my) = (ax / np, ay / np);
            // Sample variances: (sum(v^2) - sum(v)^2 / N) / (N - 1).
            let vx = (sxx.window(row, col, n) as f64 - ax * ax / np) / (np - 1.0);
            let vy = (syy.window(row, col, n) as f64 - ay * ay / np) / (np - 1.0);
            let cxy = (sxy.window(row, col, n) as f64 - ax * ay / np) / (np - 1.0);
            total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    total / count as f64
}

/// Statistics of all samples pooled across channels, scaled to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelStats {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub pixel_count: usize,
}

pub fn channel_stats(grid: &PixelGrid) -> ChannelStats {
    let mut hist = [0u64; 256];
    for plane in grid.planes() {
        for &v in plane {
            hist[usize::from(v)] += 1;
        }
    }
    let n: u64 = hist.iter().sum();
    let (sum, sum_sq) = hist.iter().enumerate().fold((0u64, 0u64), |(s, q), (v, &c)| {
        let v = v as u64;
        (s + v * c, q + v * v * c)
    });
    let mean = sum as f64 / n as f64;
    let var = (sum_sq as f64 / n as f64 - mean * mean).max(0.0);

    // Lower middle element for even counts: the one at index (n - 1) / 2.
    let target = (n - 1) / 2;
    let mut seen = 0u64;
    let mut median = 0usize;
    for (v, &c) in hist.iter().enumerate() {
        seen += c;
        if seen > target {
            median = v;
            break;
        }
    }

    ChannelStats { mean: mean / 255.0, median: median as f64 / 255.0, std: var.sqrt() / 255.0, pixel_count: n as usize }
}

/// Last decimal digit of every sample of one channel, row-major.
pub fn waveform(grid: &PixelGrid, channel: usize) -> Result<Vec<u8>> {
    let channel = Channel::from_index(channel)?;
    Ok(grid.plane(channel).iter().map(|&v| v % 10).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityReport {
    pub psnr: f64,
    pub ssim: f64,
    pub cover: ChannelStats,
    pub stego: ChannelStats,
}

pub const QUALITY_CSV_HEADER: &str =
    "cover,stego,psnr_db,ssim,mean_cover,mean_stego,median_cover,median_stego,std_cover,std_stego,pixels";

impl QualityReport {
    pub fn compute(cover: &PixelGrid, stego: &PixelGrid) -> Result<Self> {
        Ok(Self {
            psnr: psnr(cover, stego)?,
            ssim: ssim(cover, stego)?,
            cover: channel_stats(cover),
            stego: channel_stats(stego),
        })
    }

    pub fn csv_row(&self, cover_name: &str, stego_name: &str) -> String {
        format!(
            "{cover_name},{stego_name},{},{},{},{},{},{},{},{},{}",
            self.psnr,
            self.ssim,
            self.cover.mean,
            self.stego.mean,
            self.cover.median,
            self.stego.median,
            self.cover.std,
            self.stego.std,
            self.stego.pixel_count
        )
    }
}
