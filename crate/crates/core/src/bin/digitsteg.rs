use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use digitsteg::codec::{self, ChannelChoice, EmbedOptions, OverlayConfig};
use digitsteg::harness::{self, CorpusConfig};
use digitsteg::metrics::{self, QualityReport};
use digitsteg::steganalysis::{self, TABLE_HEADER};
use digitsteg::{imageio, synth, CaesarKey, Channel, Error, GlyphDatabase, Result};

const FORMAT_NOTE: &str = "Images must be uncompressed 24-bit BMP files. Convert TIFF, PNG or JPEG \
covers to BMP first (for example `convert cover.tiff BMP3:cover.bmp`).";

#[derive(Parser)]
#[command(name = "digitsteg", version, about = "Decimal-digit image steganography and LSB steganalysis")]
#[command(after_help = FORMAT_NOTE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide a message file in a cover image.
    Embed(EmbedArgs),
    /// Recover a hidden message.
    Extract {
        #[arg(long)]
        stego: PathBuf,
        #[arg(long)]
        key: CaesarKey,
        #[arg(long, default_value = "auto")]
        channel: ChannelChoice,
        /// Write the payload here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the steganalysis battery on images or directories of images.
    Analyze {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, default_value_t = steganalysis::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Write the CSV report here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// PSNR, SSIM and pooled channel statistics of a cover/stego pair.
    Quality {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        stego: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Export the last decimal digit of every sample of one channel, one per line.
    Waveform {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_parser = parse_channel)]
        channel: Channel,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed into a whole directory of covers and evaluate the stegos.
    Bench(BenchArgs),
    /// Export statistical features of every image in a directory.
    Features {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Write procedurally generated natural-texture covers.
    GenCorpus {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct OverlayArgs {
    /// Do not draw the key glyphs.
    #[arg(long)]
    no_overlay: bool,
    /// Intensity offset of the key glyphs (0..=127).
    #[arg(long, default_value_t = digitsteg::overlay::DEFAULT_OFFSET,
          value_parser = clap::value_parser!(u8).range(0..=i64::from(digitsteg::overlay::MAX_OFFSET)))]
    offset: u8,
    /// Glyph database overriding the built-in 5x7 font.
    #[arg(long)]
    glyph_file: Option<PathBuf>,
}

impl OverlayArgs {
    fn options(&self, channel: ChannelChoice) -> Result<EmbedOptions> {
        let overlay = if self.no_overlay {
            None
        } else {
            let glyphs = match &self.glyph_file {
                Some(p) => GlyphDatabase::load(p)?,
                None => GlyphDatabase::builtin().clone(),
            };
            Some(OverlayConfig { offset: self.offset, glyphs: Arc::new(glyphs), ..OverlayConfig::default() })
        };
        Ok(EmbedOptions { channel, overlay })
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    cover: PathBuf,
    /// File holding the secret message.
    #[arg(long)]
    message: PathBuf,
    #[arg(long)]
    key: CaesarKey,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "auto")]
    channel: ChannelChoice,
    #[command(flatten)]
    overlay: OverlayArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    cover_dir: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    message: PathBuf,
    #[arg(long)]
    key: CaesarKey,
    /// Stegos below this SSIM are reported as the worst case.
    #[arg(long, default_value_t = harness::DEFAULT_SSIM_FILTER)]
    ssim_filter: f64,
    /// Tag every stego good regardless of SSIM.
    #[arg(long)]
    no_ssim_filter: bool,
    #[arg(long, default_value_t = steganalysis::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Directory receiving images.csv, similarity.csv, steganalysis.csv and summary.json.
    #[arg(long)]
    report: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    overlay: OverlayArgs,
}

fn parse_channel(s: &str) -> std::result::Result<Channel, String> {
    match s.parse::<ChannelChoice>() {
        Ok(ChannelChoice::Fixed(c)) => Ok(c),
        _ => Err(format!("expected b, g or r, got {s:?}")),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed(args) => {
            let cover = imageio::load_image(&args.cover)?;
            let message = read_file(&args.message)?;
            let options = args.overlay.options(args.channel)?;
            let record = codec::embed_with(&cover, &message, args.key, &options)?;
            imageio::save_image(&record.stego, &args.out)?;
            let overlay = record
                .overlay_origin()
                .map_or_else(|| "no overlay".to_string(), |(c, r)| format!("key overlay at ({c},{r})"));
            eprintln!(
                "embedded {} bytes in the {} channel, {overlay}; PSNR {:.2} dB",
                message.len(),
                record.channel,
                metrics::psnr(&cover, &record.stego)?
            );
        }
        Command::Extract { stego, key, channel, out } => {
            let grid = imageio::load_image(&stego)?;
            let payload = codec::extract(&grid, key, channel)?;
            match out {
                Some(p) => fs::write(p, payload)?,
                None => io::stdout().write_all(&payload)?,
            }
        }
        Command::Analyze { paths, threshold, csv } => {
            let mut files = Vec::new();
            for p in paths {
                if p.is_dir() {
                    files.extend(harness::list_bmps(&p)?);
                } else {
                    files.push(p);
                }
            }
            let mut out = format!("{TABLE_HEADER}\n");
            for f in &files {
                let grid = imageio::load_image(f)?;
                let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let scores = steganalysis::analyze(&grid, threshold);
                out.push_str(&scores.csv_row(&harness::csv_field(&name)));
                out.push('\n');
            }
            write_or_print(csv.as_deref(), &out)?;
        }
        Command::Quality { cover, stego, csv } => {
            let (c, s) = (imageio::load_image(&cover)?, imageio::load_image(&stego)?);
            let report = QualityReport::compute(&c, &s)?;
            let name = |p: &Path| harness::csv_field(&p.display().to_string());
            let text = format!("{}\n{}\n", metrics::QUALITY_CSV_HEADER, report.csv_row(&name(&cover), &name(&stego)));
            write_or_print(csv.as_deref(), &text)?;
        }
        Command::Waveform { image, channel, out } => {
            let grid = imageio::load_image(&image)?;
            let digits = metrics::waveform(&grid, channel.index())?;
            let mut text = String::with_capacity(digits.len() * 2);
            for d in digits {
                text.push(char::from(b'0' + d));
                text.push('\n');
            }
            fs::write(out, text)?;
        }
        Command::Bench(args) => {
            let mut cfg = CorpusConfig::new(&args.cover_dir, &args.out_dir, read_file(&args.message)?, args.key);
            cfg.ssim_filter = (!args.no_ssim_filter).then_some(args.ssim_filter);
            cfg.threshold = args.threshold;
            cfg.workers = args.workers;
            cfg.embed = args.overlay.options(ChannelChoice::Auto)?;
            let report = harness::run_corpus(&cfg)?;
            report.write(&args.report)?;
            let s = &report.summary;
            let rate = |r: Option<f64>| r.map_or_else(|| "n/a".to_string(), |r| format!("{r:.2}%"));
            println!(
                "{} covers: {} good (detected {}), {} worst (detected {}), {} failed ({} over capacity)",
                s.corpus_size,
                s.good.images,
                rate(s.good.detection_rate),
                s.worst.images,
                rate(s.worst.detection_rate),
                s.failed,
                s.capacity_exceeded
            );
        }
        Command::Features { dir, csv } => {
            let rows = harness::export_features(&dir, &csv)?;
            eprintln!("wrote {rows} feature rows to {}", csv.display());
        }
        Command::GenCorpus { out_dir, count, width, height, seed } => {
            fs::create_dir_all(&out_dir)?;
            for i in 0..count {
                let cover = synth::natural_cover(width, height, seed + i as u64);
                imageio::save_image(&cover, out_dir.join(format!("cover{i:04}.bmp")))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}
