//! Graphical key overlay.
//!
//! The key letter is drawn as a tiny 5x7 bitmap glyph into the block of the
//! cover with the most distinct colours. The glyph pixels are shifted by a
//! fixed intensity offset on the two channels that do not carry the payload,
//! so the digit stream is never touched. Reading the key back is left to a
//! human looking at the zoomed image.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use crate::cipher::CaesarKey;
use crate::error::{Error, Result};
use crate::imageio::{Channel, PixelGrid};

pub const CELL_WIDTH: usize = 5;
pub const CELL_HEIGHT: usize = 7;
pub const DEFAULT_OFFSET: u8 = 10;
pub const DEFAULT_BLOCK_SIZE: usize = 8;
pub const MAX_OFFSET: u8 = 127;

const BUILTIN_GLYPHS: &str = include_str!("../data/font5x7.glyphs");

/// Per-letter pixel coordinates `(x, y)` inside a 5x7 cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphDatabase {
    glyphs: BTreeMap<char, Vec<(usize, usize)>>,
}

impl GlyphDatabase {
    pub fn builtin() -> &'static GlyphDatabase {
        static DB: OnceLock<GlyphDatabase> = OnceLock::new();
        DB.get_or_init(|| GlyphDatabase::parse(BUILTIN_GLYPHS).expect("built-in glyph table is valid"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Parses `<char>: x,y;x,y;...` lines. Blank lines and lines starting with
    /// `#` are skipped. All 52 ASCII letters must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut glyphs = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::GlyphParse { line: line_no, msg };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, coords) = line.split_once(':').ok_or_else(|| err("missing ':'".into()))?;
            let mut chars = name.trim().chars();
            let ch = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_alphabetic() => c,
                _ => return Err(err(format!("{:?} is not a single letter", name.trim()))),
            };
            let mut points = BTreeSet::new();
            for pair in coords.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                let (x, y) = pair.split_once(',').ok_or_else(|| err(format!("bad coordinate {pair:?}")))?;
                let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| err(format!("{pair:?}: {e}")));
                let (x, y) = (parse(x)?, parse(y)?);
                if x >= CELL_WIDTH || y >= CELL_HEIGHT {
                    return Err(err(format!("({x},{y}) is outside the {CELL_WIDTH}x{CELL_HEIGHT} cell")));
                }
                points.insert((x, y));
            }
            if points.is_empty() {
                return Err(err(format!("glyph {ch:?} is empty")));
            }
            if glyphs.insert(ch, points.into_iter().collect()).is_some() {
                return Err(err(format!("glyph {ch:?} defined twice")));
            }
        }
        if let Some(missing) = CaesarKey::all().map(CaesarKey::as_char).find(|c| !glyphs.contains_key(c)) {
            return Err(Error::GlyphMissing(missing));
        }
        Ok(Self { glyphs })
    }

    pub fn glyph(&self, ch: char) -> Result<&[(usize, usize)]> {
        self.glyphs.get(&ch).map(Vec::as_slice).ok_or(Error::GlyphMissing(ch))
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlayPlacement {
    /// `(col, row)` of the top-left glyph pixel.
    pub origin: (usize, usize),
    pub block_size: usize,
    pub offset: u8,
    pub glyph_advance: usize,
}

impl OverlayPlacement {
    pub fn new(origin: (usize, usize), block_size: usize, offset: u8) -> Result<Self> {
        if offset > MAX_OFFSET {
            return Err(Error::InvalidOffset(offset));
        }
        Ok(Self { origin, block_size, offset, glyph_advance: CELL_WIDTH + 1 })
    }
}

/// Top-left `(col, row)` of the block, scanned on a grid of stride
/// `block_size`, with the most distinct (B, G, R) triples. The first block
/// wins ties.
pub fn find_noisy_block(grid: &PixelGrid, block_size: usize) -> Result<(usize, usize)> {
    let (w, h) = (grid.width(), grid.height());
    if block_size == 0 || block_size > w.min(h) {
        return Err(Error::ImageTooSmall { width: w, height: h, required: block_size });
    }
    let mut best = ((0, 0), 0usize);
    let mut colours = Vec::with_capacity(block_size * block_size);
    for row in (0..=h - block_size).step_by(block_size) {
        for col in (0..=w - block_size).step_by(block_size) {
            colours.clear();
            for r in row..row + block_size {
                for c in col..col + block_size {
                    let [b, g, rd] = grid.bgr_at(r, c);
                    colours.push(u32::from_le_bytes([b, g, rd, 0]));
                }
            }
            colours.sort_unstable();
            colours.dedup();
            if colours.len() > best.1 {
                best = ((col, row), colours.len());
            }
        }
    }
    Ok(best.0)
}

/// Image coordinates `(col, row)` touched when drawing `text`.
pub fn glyph_pixels(text: &str, placement: &OverlayPlacement, db: &GlyphDatabase) -> Result<BTreeSet<(usize, usize)>> {
    let (col0, row0) = placement.origin;
    let mut out = BTreeSet::new();
    for (i, ch) in text.chars().enumerate() {
        let left = col0 + i * placement.glyph_advance;
        out.extend(db.glyph(ch)?.iter().map(|&(x, y)| (left + x, row0 + y)));
    }
    Ok(out)
}

fn shift(value: u8, offset: u8) -> u8 {
    match value.checked_add(offset) {
        Some(v) => v,
        None => value - offset,
    }
}

/// Draws `text` left to right from the placement origin, shifting the
/// two channels other than `payload_channel` by the placement offset.
/// Values that would pass 255 are shifted down instead.
pub fn render_text(
    grid: &PixelGrid,
    text: &str,
    payload_channel: Channel,
    placement: &OverlayPlacement,
    db: &GlyphDatabase,
) -> Result<PixelGrid> {
    if placement.offset > MAX_OFFSET {
        return Err(Error::InvalidOffset(placement.offset));
    }
    let n = text.chars().count();
    if n == 0 {
        return Ok(grid.clone());
    }
    let extent_x = (n - 1) * placement.glyph_advance + CELL_WIDTH;
    let (col, row) = placement.origin;
    if col + extent_x > grid.width() || row + CELL_HEIGHT > grid.height() {
        return Err(Error::OverlayOutOfBounds { col, row, extent_x, extent_y: CELL_HEIGHT });
    }
    let pixels = glyph_pixels(text, placement, db)?;
    let width = grid.width();
    let mut out = grid.clone();
    for channel in payload_channel.others() {
        let plane = out.plane_mut(channel);
        for &(c, r) in &pixels {
            let i = r * width + c;
            plane[i] = shift(plane[i], placement.offset);
        }
    }
    Ok(out)
}

pub fn render_key(
    grid: &PixelGrid,
    key: CaesarKey,
    payload_channel: Channel,
    placement: &OverlayPlacement,
    db: &GlyphDatabase,
) -> Result<PixelGrid> {
    render_text(grid, &key.to_string(), payload_channel, placement, db)
}
