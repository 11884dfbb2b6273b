//! Corpus benchmark runner: batch embedding, the SSIM good/worst split,
//! batch steganalysis and feature export for external classifiers.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::cipher::CaesarKey;
use crate::codec::{self, EmbedOptions};
use crate::error::{Error, Result};
use crate::imageio::{self, Channel, PixelGrid};
use crate::metrics;
use crate::steganalysis::{self, DetectorScores};

pub const DEFAULT_SSIM_FILTER: f64 = 0.9;
pub const STEGO_SUFFIX: &str = "_fmatted";

pub const IMAGES_CSV_HEADER: &str = "cover,stego,condition,channel,psnr_db,ssim,primary_sets,chi_square,\
sample_pairs,rs_analysis,fusion,crossed_threshold,estimated_bytes";
pub const SIMILARITY_CSV_HEADER: &str = "Stego-Image,Cover-Image,Similarity Index";

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub cover_dir: PathBuf,
    pub output_dir: PathBuf,
    pub message: Vec<u8>,
    pub key: CaesarKey,
    /// `None` disables the split and tags every image good.
    pub ssim_filter: Option<f64>,
    pub threshold: f64,
    /// Worker threads; 0 lets the pool pick one per core.
    pub workers: usize,
    pub embed: EmbedOptions,
}

impl CorpusConfig {
    pub fn new(
        cover_dir: impl Into<PathBuf>,
        output_dir: impl Into<PathBuf>,
        message: Vec<u8>,
        key: CaesarKey,
    ) -> Self {
        Self {
            cover_dir: cover_dir.into(),
            output_dir: output_dir.into(),
            message,
            key,
            ssim_filter: Some(DEFAULT_SSIM_FILTER),
            threshold: steganalysis::DEFAULT_THRESHOLD,
            workers: 0,
            embed: EmbedOptions::with_overlay(true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Good,
    Worst,
}

impl Condition {
    pub fn classify(ssim: f64, filter: Option<f64>) -> Self {
        match filter {
            Some(f) if ssim < f => Condition::Worst,
            _ => Condition::Good,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Good => "good",
            Condition::Worst => "worst",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageRow {
    pub cover: String,
    pub stego: String,
    pub channel: Channel,
    pub psnr: f64,
    pub ssim: f64,
    pub condition: Condition,
    pub scores: DetectorScores,
}

impl ImageRow {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |v| v.to_string());
        let s = &self.scores;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.cover),
            csv_field(&self.stego),
            self.condition.as_str(),
            self.channel.letter(),
            fmt_f64(self.psnr),
            self.ssim,
            opt(s.primary_sets),
            opt(s.chi_square),
            opt(s.sample_pairs),
            opt(s.rs_analysis),
            s.fusion,
            if s.crossed_threshold { "TRUE" } else { "FALSE" },
            s.estimated_bytes
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageFailure {
    pub cover: String,
    pub reason: String,
    pub capacity_exceeded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionSummary {
    pub images: usize,
    pub detected: usize,
    /// Percentage of stegos flagged; `None` when the partition is empty.
    pub detection_rate: Option<f64>,
    pub mean_psnr: Option<f64>,
    pub mean_ssim: Option<f64>,
}

impl ConditionSummary {
    fn of<'a>(rows: impl Iterator<Item = &'a ImageRow>) -> Self {
        let rows: Vec<&ImageRow> = rows.collect();
        let scores: Vec<DetectorScores> = rows.iter().map(|r| r.scores).collect();
        let mean = |f: fn(&ImageRow) -> f64| {
            (!rows.is_empty()).then(|| rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64)
        };
        Self {
            images: rows.len(),
            detected: scores.iter().filter(|s| s.crossed_threshold).count(),
            detection_rate: steganalysis::detection_rate(&scores).ok(),
            mean_psnr: mean(|r| r.psnr),
            mean_ssim: mean(|r| r.ssim),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusSummary {
    pub corpus_size: usize,
    pub failed: usize,
    pub capacity_exceeded: usize,
    pub ssim_filter: Option<f64>,
    pub threshold: f64,
    pub good: ConditionSummary,
    pub worst: ConditionSummary,
    pub all: ConditionSummary,
}

#[derive(Debug, Clone)]
pub struct CorpusReport {
    /// In cover filename order.
    pub rows: Vec<ImageRow>,
    pub failures: Vec<ImageFailure>,
    pub summary: CorpusSummary,
}

impl CorpusReport {
    pub fn images_csv(&self) -> String {
        let mut out = format!("{IMAGES_CSV_HEADER}\n");
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.csv_row());
        }
        out
    }

    /// Stego/cover/SSIM listing in the layout of a similarity table.
    pub fn similarity_csv(&self) -> String {
        let mut out = format!("{SIMILARITY_CSV_HEADER}\n");
        for row in &self.rows {
            let _ = writeln!(out, "{},{},{}", csv_field(&row.stego), csv_field(&row.cover), row.ssim);
        }
        out
    }

    pub fn steganalysis_csv(&self) -> String {
        let mut out = format!("{}\n", steganalysis::TABLE_HEADER);
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.scores.csv_row(&csv_field(&row.stego)));
        }
        out
    }

    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Json<'a> {
            #[serde(flatten)]
            summary: &'a CorpusSummary,
            failures: &'a [ImageFailure],
        }
        let json = Json { summary: &self.summary, failures: &self.failures };
        serde_json::to_string_pretty(&json).expect("summary is plain data") + "\n"
    }

    /// Writes `images.csv`, `similarity.csv`, `steganalysis.csv` and
    /// `summary.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join("images.csv"), self.images_csv())?;
        fs::write(dir.join("similarity.csv"), self.similarity_csv())?;
        fs::write(dir.join("steganalysis.csv"), self.steganalysis_csv())?;
        fs::write(dir.join("summary.json"), self.summary_json())?;
        Ok(())
    }
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

fn is_bmp(path: &Path) -> bool {
    path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bmp"))
}

/// BMP files directly inside `dir`, sorted by file name.
pub fn list_bmps(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::FileNotFound(dir.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if is_bmp(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// `<stem>_fmatted.bmp`.
pub fn stego_name(cover: &Path) -> String {
    let stem = cover.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    format!("{stem}{STEGO_SUFFIX}.bmp")
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::Io(io::Error::other(e)))
}

enum Outcome {
    Done(ImageRow),
    Failed { failure: ImageFailure, decodable: bool },
}

fn process(cfg: &CorpusConfig, cover_path: &Path) -> Outcome {
    let cover_name = file_name(cover_path);
    let fail = |e: Error, decodable: bool| {
        log::warn!("{cover_name}: {e}");
        Outcome::Failed {
            failure: ImageFailure {
                cover: cover_name.clone(),
                capacity_exceeded: matches!(e, Error::CapacityExceeded { .. }),
                reason: e.to_string(),
            },
            decodable,
        }
    };
    let cover = match imageio::load_image(cover_path) {
        Ok(g) => g,
        Err(e) => return fail(e, false),
    };
    match process_cover(cfg, cover_path, &cover) {
        Ok(row) => Outcome::Done(row),
        Err(e) => fail(e, true),
    }
}

fn process_cover(cfg: &CorpusConfig, cover_path: &Path, cover: &PixelGrid) -> Result<ImageRow> {
    let record = codec::embed_with(cover, &cfg.message, cfg.key, &cfg.embed)?;
    let stego_name = stego_name(cover_path);
    imageio::save_image(&record.stego, cfg.output_dir.join(&stego_name))?;
    let psnr = metrics::psnr(cover, &record.stego)?;
    let ssim = metrics::ssim(cover, &record.stego)?;
    Ok(ImageRow {
        cover: file_name(cover_path),
        stego: stego_name,
        channel: record.channel,
        psnr,
        ssim,
        condition: Condition::classify(ssim, cfg.ssim_filter),
        scores: steganalysis::analyze(&record.stego, cfg.threshold),
    })
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// Embeds `cfg.message` into every BMP of the cover directory and evaluates
/// the stegos. When covers and outputs share a directory, earlier outputs
/// (`*_fmatted.bmp`) are not treated as covers.
pub fn run_corpus(cfg: &CorpusConfig) -> Result<CorpusReport> {
    fs::create_dir_all(&cfg.output_dir)?;
    let mut covers = list_bmps(&cfg.cover_dir)?;
    if same_dir(&cfg.cover_dir, &cfg.output_dir) {
        covers.retain(|p| !p.file_stem().is_some_and(|s| s.to_string_lossy().ends_with(STEGO_SUFFIX)));
    }

    let outcomes: Vec<Outcome> = pool(cfg.workers)?.install(|| covers.par_iter().map(|p| process(cfg, p)).collect());

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut decodable = 0usize;
    for outcome in outcomes {
        match outcome {
            Outcome::Done(row) => {
                decodable += 1;
                rows.push(row);
            }
            Outcome::Failed { failure, decodable: d } => {
                decodable += usize::from(d);
                failures.push(failure);
            }
        }
    }
    if decodable == 0 {
        return Err(Error::EmptyCorpus(cfg.cover_dir.clone()));
    }

    let summary = CorpusSummary {
        corpus_size: covers.len(),
        failed: failures.len(),
        capacity_exceeded: failures.iter().filter(|f| f.capacity_exceeded).count(),
        ssim_filter: cfg.ssim_filter,
        threshold: cfg.threshold,
        good: ConditionSummary::of(rows.iter().filter(|r| r.condition == Condition::Good)),
        worst: ConditionSummary::of(rows.iter().filter(|r| r.condition == Condition::Worst)),
        all: ConditionSummary::of(rows.iter()),
    };
    Ok(CorpusReport { rows, failures, summary })
}

// --- feature export ----------------------------------------------------------

pub const FEATURE_MOMENTS: [&str; 4] = ["mean", "var", "skew", "kurt"];

/// Header of the feature CSV.
pub fn feature_header() -> String {
    let mut cols = vec!["filename".to_string(), "label".to_string()];
    for c in Channel::ALL {
        let l = c.letter();
        cols.extend(FEATURE_MOMENTS.iter().map(|m| format!("{l}_{m}")));
        cols.extend((0..10).map(|d| format!("{l}_digit{d}")));
    }
    cols.extend(["primary_sets", "chi_square", "sample_pairs", "rs_analysis", "fusion"].map(String::from));
    cols.join(",")
}

/// Mean, variance, skewness and excess kurtosis of the sample values.
/// The standardized moments are NaN for a constant plane.
pub fn histogram_moments(plane: &[u8]) -> [f64; 4] {
    let mut hist = [0u64; 256];
    for &v in plane {
        hist[usize::from(v)] += 1;
    }
    let n = plane.len() as f64;
    let mean = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum::<f64>() / n;
    let central = |k: i32| hist.iter().enumerate().map(|(v, &c)| (v as f64 - mean).powi(k) * c as f64).sum::<f64>() / n;
    let var = central(2);
    let (skew, kurt) =
        if var > 0.0 { (central(3) / var.powf(1.5), central(4) / (var * var) - 3.0) } else { (f64::NAN, f64::NAN) };
    [mean, var, skew, kurt]
}

/// Fraction of samples whose last decimal digit is 0..=9.
pub fn last_digit_distribution(plane: &[u8]) -> [f64; 10] {
    let mut bins = [0u64; 10];
    for &v in plane {
        bins[usize::from(v % 10)] += 1;
    }
    let n = plane.len().max(1) as f64;
    bins.map(|b| b as f64 / n)
}

/// Feature vector of one image, in [`feature_header`] column order after
/// the filename and label.
pub fn image_features(grid: &PixelGrid) -> Vec<f64> {
    let mut f = Vec::with_capacity(3 * 14 + 5);
    for c in Channel::ALL {
        f.extend(histogram_moments(grid.plane(c)));
        f.extend(last_digit_distribution(grid.plane(c)));
    }
    let s = steganalysis::analyze(grid, steganalysis::DEFAULT_THRESHOLD);
    let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
    f.extend([nan(s.primary_sets), nan(s.chi_square), nan(s.sample_pairs), nan(s.rs_analysis), s.fusion]);
    f
}

/// Writes one feature row per BMP in `dir` with a `?` label column and
/// returns the number of rows.
pub fn export_features(dir: impl AsRef<Path>, csv: impl AsRef<Path>) -> Result<usize> {
    let files = list_bmps(dir)?;
    let rows: Vec<String> = files
        .par_iter()
        .map(|path| {
            let grid = imageio::load_image(path)?;
            let values: Vec<String> = image_features(&grid).iter().map(|v| v.to_string()).collect();
            Ok(format!("{},?,{}", csv_field(&file_name(path)), values.join(",")))
        })
        .collect::<Result<_>>()?;
    let mut out = feature_header() + "\n";
    for row in &rows {
        out.push_str(row);
        out.push('\n');
    }
    fs::write(csv, out)?;
    Ok(rows.len())
}
