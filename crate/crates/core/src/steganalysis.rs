//! Statistical LSB steganalysis: the pair-of-values chi-square attack,
//! sample pair analysis, RS analysis and the primary-sets estimator, plus
//! mean fusion and a threshold verdict.
//!
//! Every detector runs on each colour plane independently and reports the
//! mean over the planes where it produced a value. A detector reports `None`
//! when its statistic is undefined for the image (for example a constant
//! plane).

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::imageio::{Channel, PixelGrid};

pub const DEFAULT_THRESHOLD: f64 = 0.2;
pub const RS_MASK: [bool; 4] = [false, true, true, false];

pub const TABLE_HEADER: &str =
    "FileName,Crossed threshold?,Data Size,Primary-Sets,Chi-Square,Sample-Pairs,RS-analysis,Fusion-(mean)";

fn mean_present(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.into_iter().flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn per_channel(grid: &PixelGrid, f: impl Fn(&[u8], usize, usize) -> Option<f64>) -> Option<f64> {
    mean_present(Channel::ALL.map(|c| f(grid.plane(c), grid.width(), grid.height())))
}

/// Real roots of `a x^2 + b x + c`, ascending. A negative discriminant
/// yields the vertex `-b / 2a` as a double root.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return None;
    }
    if a.abs() < 1e-12 {
        if b.abs() < 1e-12 {
            return None;
        }
        let r = -c / b;
        return Some((r, r));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        let v = -b / (2.0 * a);
        return Some((v, v));
    }
    let sq = disc.sqrt();
    // Numerically stable form.
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

// --- chi-square -------------------------------------------------------------

/// Probability that the plane's pairs of values (2k, 2k+1) have been
/// equalized by LSB replacement.
pub fn chi_square_plane(plane: &[u8]) -> Option<f64> {
    let mut hist = [0u64; 256];
    for &v in plane {
        hist[usize::from(v)] += 1;
    }
    let mut stat = 0.0;
    let mut pairs = 0usize;
    for k in 0..128 {
        let (even, odd) = (hist[2 * k] as f64, hist[2 * k + 1] as f64);
        if even + odd > 0.0 {
            let expected = (even + odd) / 2.0;
            stat += (even - expected).powi(2) / expected;
            pairs += 1;
        }
    }
    let df = pairs.checked_sub(1).filter(|&d| d >= 1)?;
    let dist = ChiSquared::new(df as f64).ok()?;
    Some(dist.sf(stat).clamp(0.0, 1.0))
}

pub fn chi_square_attack(grid: &PixelGrid) -> Option<f64> {
    per_channel(grid, |p, _, _| chi_square_plane(p))
}

// --- sample pair analysis ---------------------------------------------------

/// Trace-set counts over horizontally adjacent pairs `(u, v)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub x: u64,
    pub y: u64,
    pub z: u64,
    pub w: u64,
    pub total: u64,
}

pub fn pair_counts(plane: &[u8], width: usize, height: usize) -> PairCounts {
    let mut c = PairCounts::default();
    for row in plane.chunks_exact(width).take(height) {
        for pair in row.windows(2) {
            let (u, v) = (pair[0], pair[1]);
            c.total += 1;
            if u == v {
                c.z += 1;
                continue;
            }
            let v_even = v % 2 == 0;
            if (v_even && u < v) || (!v_even && u > v) {
                c.x += 1;
            } else {
                c.y += 1;
                if u / 2 == v / 2 {
                    c.w += 1;
                }
            }
        }
    }
    c
}

/// Estimated fraction of samples carrying LSB-replaced bits, from the
/// smaller root of `(W+Z)/2 p^2 + (2X - P) p + (Y - X) = 0`.
pub fn sample_pairs_plane(plane: &[u8], width: usize, height: usize) -> Option<f64> {
    if width < 2 {
        return None;
    }
    let c = pair_counts(plane, width, height);
    if c.total == 0 || c.w + c.z == 0 {
        return None;
    }
    let a = (c.w + c.z) as f64 / 2.0;
    let b = 2.0 * c.x as f64 - c.total as f64;
    let cc = c.y as f64 - c.x as f64;
    let (lo, _) = quadratic_roots(a, b, cc)?;
    Some(lo.clamp(0.0, 1.0))
}

pub fn sample_pairs(grid: &PixelGrid) -> Option<f64> {
    per_channel(grid, sample_pairs_plane)
}

// --- RS analysis ------------------------------------------------------------

fn flip(v: i32) -> i32 {
    v ^ 1
}

fn flip_shifted(v: i32) -> i32 {
    // F(-1): 0 <-> -1, 1 <-> 2, ..., 255 <-> 256.
    if v & 1 == 0 {
        v - 1
    } else {
        v + 1
    }
}

fn smoothness(g: &[i32; 4]) -> i32 {
    g.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Regular and singular group fractions `(R_M, S_M, R_-M, S_-M)`.
fn rs_counts(plane: &[u8], width: usize, height: usize, pre_flip: bool) -> Option<[f64; 4]> {
    let mut counts = [0u64; 4];
    let mut groups = 0u64;
    for row in plane.chunks_exact(width).take(height) {
        for chunk in row.chunks_exact(RS_MASK.len()) {
            let mut g = [0i32; 4];
            for (dst, &v) in g.iter_mut().zip(chunk) {
                *dst = if pre_flip { flip(i32::from(v)) } else { i32::from(v) };
            }
            let base = smoothness(&g);
            let mut pos = g;
            let mut neg = g;
            for i in 0..4 {
                if RS_MASK[i] {
                    pos[i] = flip(g[i]);
                    neg[i] = flip_shifted(g[i]);
                }
            }
            let (fp, fn_) = (smoothness(&pos), smoothness(&neg));
            counts[0] += u64::from(fp > base);
            counts[1] += u64::from(fp < base);
            counts[2] += u64::from(fn_ > base);
            counts[3] += u64::from(fn_ < base);
            groups += 1;
        }
    }
    (groups > 0).then(|| counts.map(|c| c as f64 / groups as f64))
}

/// Estimated message length from the RS quadratic
/// `2(d1 + d0) x^2 + (d-0 - d-1 - d1 - 3 d0) x + d0 - d-0 = 0`, `p = x / (x - 1/2)`.
///
/// The quadratic is solved after substituting `x = p / (2(p - 1))`, which
/// keeps full embedding (`x -> inf`) at the finite root `p = 1`. Of the two
/// roots the one with the smaller `|x|` is taken.
pub fn rs_analysis_plane(plane: &[u8], width: usize, height: usize) -> Option<f64> {
    if width < RS_MASK.len() {
        return None;
    }
    let [rm, sm, rnm, snm] = rs_counts(plane, width, height, false)?;
    let [rm1, sm1, rnm1, snm1] = rs_counts(plane, width, height, true)?;
    let (d0, d1) = (rm - sm, rm1 - sm1);
    let (dn0, dn1) = (rnm - snm, rnm1 - snm1);
    let a = 2.0 * (d1 + d0);
    let b = dn0 - dn1 - d1 - 3.0 * d0;
    let c = d0 - dn0;
    // a x^2 + b x + c = 0  times 4(p - 1)^2:
    let (p1, p2) = quadratic_roots(a + 2.0 * b + 4.0 * c, -(2.0 * b + 8.0 * c), 4.0 * c)?;
    let x_mag = |p: f64| (p / (p - 1.0)).abs();
    let p = if x_mag(p1) <= x_mag(p2) { p1 } else { p2 };
    p.is_finite().then(|| p.clamp(0.0, 1.0))
}

pub fn rs_analysis(grid: &PixelGrid) -> Option<f64> {
    per_channel(grid, rs_analysis_plane)
}

// --- primary sets -----------------------------------------------------------

/// Counts over the finest pair partition for the closest trace sets:
/// `C_m` holds pairs whose values differ by `m` after dropping the LSB,
/// `D_n` pairs at distance `n`, and `X_1` / `Y_1` the distance-1 pairs
/// inside `C_1` / `C_0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrimarySetCounts {
    pub c0: u64,
    pub c1: u64,
    pub d0: u64,
    pub d2: u64,
    pub x1: u64,
    pub y1: u64,
}

pub fn primary_set_counts(plane: &[u8], width: usize, height: usize) -> PrimarySetCounts {
    let mut c = PrimarySetCounts::default();
    for row in plane.chunks_exact(width).take(height) {
        for pair in row.windows(2) {
            let (u, v) = (i32::from(pair[0]), i32::from(pair[1]));
            let diff = (u - v).abs();
            let m = ((u >> 1) - (v >> 1)).abs();
            match m {
                0 => c.c0 += 1,
                1 => c.c1 += 1,
                _ => {}
            }
            match (diff, m) {
                (0, _) => c.d0 += 1,
                (2, _) => c.d2 += 1,
                (1, 1) => c.x1 += 1,
                (1, 0) => c.y1 += 1,
                _ => {}
            }
        }
    }
    c
}

/// Primary-sets estimate from
/// `(2|C0| - |C1|) p^2 / 4 - (2|D0| - |D2| + 2|Y1| - 2|X1|) p / 2 + |Y1| - |X1| = 0`.
pub fn primary_sets_plane(plane: &[u8], width: usize, height: usize) -> Option<f64> {
    if width < 2 {
        return None;
    }
    let c = primary_set_counts(plane, width, height);
    if c.x1 + c.y1 == 0 || c.c1 == 0 {
        return None;
    }
    let f = |v: u64| v as f64;
    let a = (2.0 * f(c.c0) - f(c.c1)) / 4.0;
    let b = -(2.0 * f(c.d0) - f(c.d2) + 2.0 * f(c.y1) - 2.0 * f(c.x1)) / 2.0;
    let cc = f(c.y1) - f(c.x1);
    let (r1, r2) = quadratic_roots(a, b, cc)?;
    let p = if r1.abs() <= r2.abs() { r1 } else { r2 };
    Some(p.clamp(0.0, 1.0))
}

pub fn primary_sets(grid: &PixelGrid) -> Option<f64> {
    per_channel(grid, primary_sets_plane)
}

// --- fusion -----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorScores {
    pub primary_sets: Option<f64>,
    pub chi_square: Option<f64>,
    pub sample_pairs: Option<f64>,
    pub rs_analysis: Option<f64>,
    pub fusion: f64,
    pub crossed_threshold: bool,
    pub estimated_bytes: u64,
}

impl DetectorScores {
    /// Fuses individual scores for an image of `samples` channel values.
    pub fn fuse(
        primary_sets: Option<f64>,
        chi_square: Option<f64>,
        sample_pairs: Option<f64>,
        rs_analysis: Option<f64>,
        threshold: f64,
        samples: usize,
    ) -> Self {
        let fusion = mean_present([primary_sets, chi_square, sample_pairs, rs_analysis]).unwrap_or(0.0);
        Self {
            primary_sets,
            chi_square,
            sample_pairs,
            rs_analysis,
            fusion,
            crossed_threshold: fusion > threshold,
            estimated_bytes: (fusion * samples as f64 / 8.0).round() as u64,
        }
    }

    pub fn csv_row(&self, file_name: &str) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |v| v.to_string());
        format!(
            "{file_name},{},{},{},{},{},{},{}",
            if self.crossed_threshold { "TRUE" } else { "FALSE" },
            self.estimated_bytes,
            opt(self.primary_sets),
            opt(self.chi_square),
            opt(self.sample_pairs),
            opt(self.rs_analysis),
            self.fusion
        )
    }
}

pub fn analyze(grid: &PixelGrid, threshold: f64) -> DetectorScores {
    DetectorScores::fuse(
        primary_sets(grid),
        chi_square_attack(grid),
        sample_pairs(grid),
        rs_analysis(grid),
        threshold,
        grid.pixel_count() * 3,
    )
}

/// Percentage of reports whose verdict crossed the threshold.
pub fn detection_rate(reports: &[DetectorScores]) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let flagged = reports.iter().filter(|r| r.crossed_threshold).count();
    Ok(100.0 * flagged as f64 / reports.len() as f64)
}
