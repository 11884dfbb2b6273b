//! Decimal-digit LSB steganography for lossless 24-bit images.
//!
//! A payload is Caesar-shifted with a one-letter key and written, three
//! decimal digits per byte, into the last decimal digit of the samples of
//! whichever colour channel it disturbs least. The key itself is drawn as a
//! tiny glyph on the two remaining channels. The crate also carries the
//! statistical steganalysis battery used to evaluate the scheme, quality
//! metrics and a corpus benchmark runner.
//!
//! ```
//! use digitsteg::{codec, CaesarKey, ChannelChoice, PixelGrid};
//!
//! let cover = digitsteg::synth::natural_cover(64, 64, 1);
//! let key = CaesarKey::new('k').unwrap();
//! let record = codec::embed(&cover, b"attack at dawn", key, true).unwrap();
//! let secret = codec::extract(&record.stego, key, ChannelChoice::Auto).unwrap();
//! assert_eq!(secret, b"attack at dawn");
//! # let _: &PixelGrid = &record.stego;
//! ```

pub mod cipher;
pub mod codec;
pub mod error;
pub mod harness;
pub mod imageio;
pub mod metrics;
pub mod overlay;
pub mod steganalysis;
pub mod synth;

pub use cipher::{CaesarKey, CipherText};
pub use codec::{ChannelChoice, DigitStream, EmbedOptions, EmbedRecord, HeaderLayout, OverlayConfig};
pub use error::{Error, Result};
pub use imageio::{load_image, save_image, Channel, PixelGrid};
pub use metrics::{ChannelStats, QualityReport};
pub use overlay::{GlyphDatabase, OverlayPlacement};
pub use steganalysis::{analyze, DetectorScores};
