use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image: {0}")]
    CorruptImage(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("channel index {0} is not one of 0 (blue), 1 (green), 2 (red)")]
    BadChannelIndex(usize),
    #[error("invalid key {0:?}: the key must be a single ASCII letter")]
    InvalidKey(String),
    #[error("cipher value {value} minus key offset {offset} is outside 0..=255")]
    OutOfRange { value: u16, offset: u8 },
    #[error("payload of {0} bytes does not fit the 8-digit length field")]
    PayloadTooLong(usize),
    #[error("digit stream of {needed} digits exceeds channel capacity of {available} pixels")]
    CapacityExceeded { needed: usize, available: usize },
    #[error("no channel carries a valid payload header for this key")]
    NoPayloadFound,
    #[error("image of {width}x{height} is smaller than the required {required}x{required} block")]
    ImageTooSmall { width: usize, height: usize, required: usize },
    #[error("no glyph for character {0:?}")]
    GlyphMissing(char),
    #[error("overlay extent {extent_x}x{extent_y} at ({col},{row}) leaves the image")]
    OverlayOutOfBounds { col: usize, row: usize, extent_x: usize, extent_y: usize },
    #[error("overlay offset {0} must be at most 127")]
    InvalidOffset(u8),
    #[error("glyph file line {line}: {msg}")]
    GlyphParse { line: usize, msg: String },
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("no decodable BMP covers in {0}")]
    EmptyCorpus(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the data rather than the environment
    /// (bad image, too-large payload, wrong key).
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::FileNotFound(_))
    }
}
