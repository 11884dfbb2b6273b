//! Uncompressed 24-bit BMP decoding/encoding and the canonical channel
//! serialization shared by the codec, metrics and detectors.
//!
//! A [`PixelGrid`] keeps three separate planes in blue, green, red order.
//! Each plane is row-major with row 0 at the top of the picture, whatever the
//! row order of the file it came from.

use std::fmt;
use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

const FILE_HEADER_LEN: usize = 14;
const INFO_HEADER_LEN: usize = 40;
const BI_RGB: u32 = 0;

/// One of the three colour planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Blue = 0,
    Green = 1,
    Red = 2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Blue, Channel::Green, Channel::Red];

    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            0 => Ok(Channel::Blue),
            1 => Ok(Channel::Green),
            2 => Ok(Channel::Red),
            other => Err(Error::BadChannelIndex(other)),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// The two channels that are not `self`, in index order.
    pub fn others(self) -> [Channel; 2] {
        match self {
            Channel::Blue => [Channel::Green, Channel::Red],
            Channel::Green => [Channel::Blue, Channel::Red],
            Channel::Red => [Channel::Blue, Channel::Green],
        }
    }

    pub fn letter(self) -> char {
        match self {
            Channel::Blue => 'b',
            Channel::Green => 'g',
            Channel::Red => 'r',
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Blue => "blue",
            Channel::Green => "green",
            Channel::Red => "red",
        })
    }
}

/// Decoded 24-bit raster, stored as three planes (blue, green, red).
#[derive(Clone, PartialEq, Eq)]
pub struct PixelGrid {
    width: usize,
    height: usize,
    planes: [Vec<u8>; 3],
}

impl fmt::Debug for PixelGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PixelGrid").field("width", &self.width).field("height", &self.height).finish_non_exhaustive()
    }
}

impl PixelGrid {
    /// Builds a grid from three row-major planes in blue, green, red order.
    pub fn from_planes(width: usize, height: usize, planes: [Vec<u8>; 3]) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid(format!("{width}x{height} has a zero dimension")));
        }
        let len = width.checked_mul(height).ok_or_else(|| Error::InvalidGrid("dimensions overflow".into()))?;
        if let Some(bad) = planes.iter().position(|p| p.len() != len) {
            return Err(Error::InvalidGrid(format!("plane {bad} has {} samples, expected {len}", planes[bad].len())));
        }
        Ok(Self { width, height, planes })
    }

    /// Builds a grid from interleaved B,G,R bytes, top row first.
    pub fn from_bgr(width: usize, height: usize, bgr: &[u8]) -> Result<Self> {
        let len = width.saturating_mul(height);
        if bgr.len() != len.saturating_mul(3) {
            return Err(Error::InvalidGrid(format!("{} interleaved bytes for a {width}x{height} grid", bgr.len())));
        }
        let mut planes = [Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len)];
        for px in bgr.chunks_exact(3) {
            for (plane, &v) in planes.iter_mut().zip(px) {
                plane.push(v);
            }
        }
        Self::from_planes(width, height, planes)
    }

    /// A grid where every channel of every pixel is `value`.
    pub fn filled(width: usize, height: usize, bgr: [u8; 3]) -> Result<Self> {
        let len = width.saturating_mul(height);
        Self::from_planes(width, height, bgr.map(|v| vec![v; len]))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixels per plane.
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn plane(&self, channel: Channel) -> &[u8] {
        &self.planes[channel.index()]
    }

    pub fn plane_mut(&mut self, channel: Channel) -> &mut [u8] {
        &mut self.planes[channel.index()]
    }

    pub fn planes(&self) -> &[Vec<u8>; 3] {
        &self.planes
    }

    pub fn sample(&self, channel: Channel, row: usize, col: usize) -> u8 {
        self.planes[channel.index()][row * self.width + col]
    }

    /// The (B, G, R) triple at a pixel.
    pub fn bgr_at(&self, row: usize, col: usize) -> [u8; 3] {
        let i = row * self.width + col;
        [self.planes[0][i], self.planes[1][i], self.planes[2][i]]
    }

    /// Interleaved B,G,R bytes, top row first.
    pub fn to_bgr(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixel_count() * 3);
        for i in 0..self.pixel_count() {
            out.extend(self.planes.iter().map(|p| p[i]));
        }
        out
    }
}

/// Row-major flattening of one plane (outer loop rows, inner loop columns).
pub fn serialize_channel(grid: &PixelGrid, channel: usize) -> Result<Vec<u8>> {
    let channel = Channel::from_index(channel)?;
    Ok(grid.plane(channel).to_vec())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatTag {
    Bmp24Uncompressed,
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageFormatInfo {
    pub format: FormatTag,
    pub compressed: bool,
}

/// Identifies the container from its leading bytes without decoding pixels.
pub fn probe_format(bytes: &[u8]) -> ImageFormatInfo {
    let other =
        |name: &str, compressed: bool| ImageFormatInfo { format: FormatTag::Other(name.to_string()), compressed };
    match bytes {
        [0xFF, 0xD8, 0xFF, ..] => other("jpeg", true),
        [0x89, b'P', b'N', b'G', ..] => other("png", true),
        [b'G', b'I', b'F', b'8', ..] => other("gif", true),
        [b'I', b'I', 42, 0, ..] | [b'M', b'M', 0, 42, ..] => other("tiff", false),
        [b'R', b'I', b'F', b'F', _, _, _, _, b'W', b'E', b'B', b'P', ..] => other("webp", true),
        [b'B', b'M', ..] if bytes.len() >= FILE_HEADER_LEN + INFO_HEADER_LEN => {
            let bpp = le_u16(bytes, 28);
            let compression = le_u32(bytes, 30);
            match (bpp, compression) {
                (24, BI_RGB) => ImageFormatInfo { format: FormatTag::Bmp24Uncompressed, compressed: false },
                (bpp, BI_RGB) => other(&format!("bmp{bpp}"), false),
                (bpp, _) => other(&format!("bmp{bpp}"), true),
            }
        }
        [b'B', b'M', ..] => other("bmp", false),
        _ => other("unknown", false),
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<PixelGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    decode_bmp(&bytes)
}

pub fn save_image(grid: &PixelGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_bmp(grid))?;
    Ok(())
}

pub fn decode_bmp(bytes: &[u8]) -> Result<PixelGrid> {
    let info = probe_format(bytes);
    match info.format {
        FormatTag::Bmp24Uncompressed => {}
        FormatTag::Other(name) if name == "bmp" => {
            return Err(Error::CorruptImage("truncated BMP header".into()));
        }
        FormatTag::Other(name) if info.compressed => {
            return Err(Error::UnsupportedFormat(format!("{name} (compressed or lossy)")));
        }
        FormatTag::Other(name) => {
            return Err(Error::UnsupportedFormat(format!("{name}; only uncompressed 24-bit BMP is accepted")));
        }
    }

    let pixel_offset = le_u32(bytes, 10) as usize;
    let dib_len = le_u32(bytes, 14) as usize;
    if dib_len < INFO_HEADER_LEN {
        return Err(Error::UnsupportedFormat(format!("BMP core header of {dib_len} bytes")));
    }
    let raw_width = le_i32(bytes, 18);
    let raw_height = le_i32(bytes, 22);
    if le_u16(bytes, 26) != 1 {
        return Err(Error::CorruptImage("colour plane count is not 1".into()));
    }
    if raw_width <= 0 || raw_height == 0 || raw_height == i32::MIN {
        return Err(Error::CorruptImage(format!("bad dimensions {raw_width}x{raw_height}")));
    }
    let width = raw_width as usize;
    let height = raw_height.unsigned_abs() as usize;
    let top_down = raw_height < 0;

    let stride = row_stride(width);
    let needed = stride
        .checked_mul(height)
        .and_then(|n| n.checked_add(pixel_offset))
        .ok_or_else(|| Error::CorruptImage("dimensions overflow".into()))?;
    if pixel_offset < FILE_HEADER_LEN + dib_len || bytes.len() < needed {
        return Err(Error::CorruptImage(format!("pixel array needs {needed} bytes, file has {}", bytes.len())));
    }

    let len = width * height;
    let mut planes = [vec![0u8; len], vec![0u8; len], vec![0u8; len]];
    for row in 0..height {
        let file_row = if top_down { row } else { height - 1 - row };
        let start = pixel_offset + file_row * stride;
        let src = &bytes[start..start + width * 3];
        for (col, px) in src.chunks_exact(3).enumerate() {
            let i = row * width + col;
            planes[0][i] = px[0];
            planes[1][i] = px[1];
            planes[2][i] = px[2];
        }
    }
    PixelGrid::from_planes(width, height, planes)
}

/// 54-byte header followed by bottom-up BGR rows padded to 4 bytes.
pub fn encode_bmp(grid: &PixelGrid) -> Vec<u8> {
    let (width, height) = (grid.width(), grid.height());
    let stride = row_stride(width);
    let image_len = stride * height;
    let offset = FILE_HEADER_LEN + INFO_HEADER_LEN;
    let mut out = Vec::with_capacity(offset + image_len);

    out.extend_from_slice(b"BM");
    out.extend_from_slice(&((offset + image_len) as u32).to_le_bytes());
    out.extend_from_slice(&[0; 4]);
    out.extend_from_slice(&(offset as u32).to_le_bytes());

    out.extend_from_slice(&(INFO_HEADER_LEN as u32).to_le_bytes());
    out.extend_from_slice(&(width as i32).to_le_bytes());
    out.extend_from_slice(&(height as i32).to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&24u16.to_le_bytes());
    out.extend_from_slice(&BI_RGB.to_le_bytes());
    out.extend_from_slice(&(image_len as u32).to_le_bytes());
    out.extend_from_slice(&2835i32.to_le_bytes());
    out.extend_from_slice(&2835i32.to_le_bytes());
    out.extend_from_slice(&[0; 8]);

    let [b, g, r] = grid.planes();
    let pad = stride - width * 3;
    for row in (0..height).rev() {
        for i in row * width..(row + 1) * width {
            out.extend_from_slice(&[b[i], g[i], r[i]]);
        }
        out.extend(std::iter::repeat_n(0, pad));
    }
    out
}

fn row_stride(width: usize) -> usize {
    (width * 3).div_ceil(4) * 4
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn le_i32(b: &[u8], at: usize) -> i32 {
    le_u32(b, at) as i32
}
