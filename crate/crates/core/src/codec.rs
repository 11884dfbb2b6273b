//! Decimal last-digit embedding.
//!
//! Every payload byte is Caesar-shifted, written as a zero-padded three-digit
//! decimal number and spread over three consecutive samples of one channel,
//! one digit per sample. The stream starts with a ten-digit header: the magic
//! digits `9, 7` followed by the payload length as eight decimal digits.
//!
//! The carrier channel is the one whose per-pixel difference from the cover
//! has the smallest population standard deviation once the stream is written
//! into it.

use std::sync::Arc;

use crate::cipher::{self, CaesarKey};
use crate::error::{Error, Result};
use crate::imageio::{Channel, PixelGrid};
use crate::overlay::{self, GlyphDatabase, OverlayPlacement};

pub const MAGIC: [u8; 2] = [9, 7];
pub const LENGTH_DIGITS: usize = 8;
pub const HEADER_DIGITS: usize = MAGIC.len() + LENGTH_DIGITS;
pub const DIGITS_PER_BYTE: usize = 3;
pub const MAX_PAYLOAD_LEN: usize = 99_999_999;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderLayout {
    pub magic: [u8; 2],
    pub length: usize,
}

impl HeaderLayout {
    pub fn new(length: usize) -> Result<Self> {
        if length > MAX_PAYLOAD_LEN {
            return Err(Error::PayloadTooLong(length));
        }
        Ok(Self { magic: MAGIC, length })
    }

    pub fn digits(&self) -> [u8; HEADER_DIGITS] {
        let mut out = [0u8; HEADER_DIGITS];
        out[..2].copy_from_slice(&self.magic);
        let mut n = self.length;
        for slot in out[2..].iter_mut().rev() {
            *slot = (n % 10) as u8;
            n /= 10;
        }
        out
    }

    /// Parses the first ten digits; `None` unless the magic matches.
    pub fn parse(digits: &[u8]) -> Option<Self> {
        if digits.len() < HEADER_DIGITS || digits[..2] != MAGIC {
            return None;
        }
        let length = digits[2..HEADER_DIGITS].iter().fold(0usize, |acc, &d| acc * 10 + usize::from(d));
        Some(Self { magic: MAGIC, length })
    }

    /// Pixels needed to carry the header plus `length` payload bytes.
    pub fn stream_len(&self) -> usize {
        HEADER_DIGITS + DIGITS_PER_BYTE * self.length
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitStream {
    digits: Vec<u8>,
    source_len: usize,
}

impl DigitStream {
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }
}

pub fn build_digit_stream(payload: &[u8], key: CaesarKey) -> Result<DigitStream> {
    let header = HeaderLayout::new(payload.len())?;
    let mut digits = Vec::with_capacity(header.stream_len());
    digits.extend_from_slice(&header.digits());
    for &v in cipher::encrypt(payload, key).values() {
        digits.extend_from_slice(&[(v / 100) as u8, (v / 10 % 10) as u8, (v % 10) as u8]);
    }
    Ok(DigitStream { digits, source_len: payload.len() })
}

/// Largest payload, in bytes, a `width x height` cover can carry.
pub fn capacity(width: usize, height: usize) -> usize {
    (width * height).saturating_sub(HEADER_DIGITS) / DIGITS_PER_BYTE
}

/// Replaces the last decimal digit of `pixel` with `digit`.
///
/// For 250..=255 the replacement can exceed 255; one ten is dropped then,
/// so 255 with digit 9 becomes 249.
pub fn embed_digit(pixel: u8, digit: u8) -> u8 {
    debug_assert!(digit < 10);
    let base = u16::from(pixel) / 10 * 10;
    let candidate = base + u16::from(digit);
    if candidate > 255 {
        (candidate - 10) as u8
    } else {
        candidate as u8
    }
}

pub fn extract_digit(pixel: u8) -> u8 {
    pixel % 10
}

/// Population standard deviation of `plane - embedded(plane)` over the whole
/// plane; pixels past the stream contribute zero differences.
pub fn difference_std(plane: &[u8], digits: &[u8]) -> f64 {
    let n = plane.len();
    if n == 0 {
        return 0.0;
    }
    let (mut sum, mut sum_sq) = (0i64, 0i64);
    for (&p, &d) in plane.iter().zip(digits) {
        let diff = i64::from(p) - i64::from(embed_digit(p, d));
        sum += diff;
        sum_sq += diff * diff;
    }
    let n = n as f64;
    let mean = sum as f64 / n;
    (sum_sq as f64 / n - mean * mean).max(0.0).sqrt()
}

/// Trial-embeds the stream into each channel and returns the one with the
/// least difference std (ties go to the lower index) along with all three stds.
pub fn select_channel(grid: &PixelGrid, stream: &DigitStream) -> Result<(Channel, [f64; 3])> {
    check_capacity(grid, stream)?;
    let stds = Channel::ALL.map(|c| difference_std(grid.plane(c), stream.digits()));
    let mut best = Channel::Blue;
    for c in Channel::ALL {
        if stds[c.index()] < stds[best.index()] {
            best = c;
        }
    }
    Ok((best, stds))
}

fn check_capacity(grid: &PixelGrid, stream: &DigitStream) -> Result<()> {
    if stream.len() > grid.pixel_count() {
        return Err(Error::CapacityExceeded { needed: stream.len(), available: grid.pixel_count() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelChoice {
    #[default]
    Auto,
    Fixed(Channel),
}

impl std::str::FromStr for ChannelChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(ChannelChoice::Auto),
            "b" | "blue" | "0" => Ok(ChannelChoice::Fixed(Channel::Blue)),
            "g" | "green" | "1" => Ok(ChannelChoice::Fixed(Channel::Green)),
            "r" | "red" | "2" => Ok(ChannelChoice::Fixed(Channel::Red)),
            other => Err(format!("unknown channel {other:?}; expected auto, b, g or r")),
        }
    }
}

/// Settings for the graphical key overlay.
#[derive(Debug, Clone)]
pub struct OverlayConfig {
    pub offset: u8,
    pub block_size: usize,
    pub glyphs: Arc<GlyphDatabase>,
}

impl Default for OverlayConfig {
    fn default() -> Self {
        Self {
            offset: overlay::DEFAULT_OFFSET,
            block_size: overlay::DEFAULT_BLOCK_SIZE,
            glyphs: Arc::new(GlyphDatabase::builtin().clone()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmbedOptions {
    pub channel: ChannelChoice,
    pub overlay: Option<OverlayConfig>,
}

impl EmbedOptions {
    pub fn with_overlay(overlay: bool) -> Self {
        Self { channel: ChannelChoice::Auto, overlay: overlay.then(OverlayConfig::default) }
    }
}

#[derive(Debug, Clone)]
pub struct EmbedRecord {
    pub stego: PixelGrid,
    pub channel: Channel,
    pub header: HeaderLayout,
    pub overlay: Option<OverlayPlacement>,
    pub channel_stds: [f64; 3],
}

impl EmbedRecord {
    pub fn overlay_origin(&self) -> Option<(usize, usize)> {
        self.overlay.as_ref().map(|p| p.origin)
    }
}

/// Embeds with std-based channel selection and the default overlay settings.
pub fn embed(grid: &PixelGrid, payload: &[u8], key: CaesarKey, overlay_enabled: bool) -> Result<EmbedRecord> {
    embed_with(grid, payload, key, &EmbedOptions::with_overlay(overlay_enabled))
}

pub fn embed_with(grid: &PixelGrid, payload: &[u8], key: CaesarKey, options: &EmbedOptions) -> Result<EmbedRecord> {
    let stream = build_digit_stream(payload, key)?;
    let (selected, channel_stds) = select_channel(grid, &stream)?;
    let channel = match options.channel {
        ChannelChoice::Auto => selected,
        ChannelChoice::Fixed(c) => c,
    };

    let mut stego = grid.clone();
    for (sample, &digit) in stego.plane_mut(channel).iter_mut().zip(stream.digits()) {
        *sample = embed_digit(*sample, digit);
    }

    let placement = match &options.overlay {
        None => None,
        Some(cfg) => {
            let origin = overlay::find_noisy_block(grid, cfg.block_size)?;
            let placement = OverlayPlacement::new(origin, cfg.block_size, cfg.offset)?;
            stego = overlay::render_key(&stego, key, channel, &placement, &cfg.glyphs)?;
            Some(placement)
        }
    };

    Ok(EmbedRecord {
        stego,
        channel,
        header: HeaderLayout { magic: MAGIC, length: payload.len() },
        overlay: placement,
        channel_stds,
    })
}

/// Decodes a payload from one plane.
pub fn read_channel(plane: &[u8], key: CaesarKey) -> Result<Vec<u8>> {
    let head: Vec<u8> = plane.iter().take(HEADER_DIGITS).map(|&p| extract_digit(p)).collect();
    let header = HeaderLayout::parse(&head).ok_or(Error::NoPayloadFound)?;
    if header.stream_len() > plane.len() {
        return Err(Error::NoPayloadFound);
    }
    plane[HEADER_DIGITS..header.stream_len()]
        .chunks_exact(DIGITS_PER_BYTE)
        .map(|g| {
            let value = g.iter().fold(0u16, |acc, &p| acc * 10 + u16::from(extract_digit(p)));
            cipher::decrypt_value(value, key)
        })
        .collect()
}

/// Recovers the payload. Under `Auto` the channels are tried blue, green, red
/// and the first one with a valid header and an in-range payload wins.
pub fn extract(stego: &PixelGrid, key: CaesarKey, hint: ChannelChoice) -> Result<Vec<u8>> {
    match hint {
        ChannelChoice::Fixed(c) => read_channel(stego.plane(c), key),
        ChannelChoice::Auto => {
            Channel::ALL.iter().find_map(|&c| read_channel(stego.plane(c), key).ok()).ok_or(Error::NoPayloadFound)
        }
    }
}

/// Like [`extract`] but also reports which channel carried the payload.
pub fn extract_located(stego: &PixelGrid, key: CaesarKey, hint: ChannelChoice) -> Result<(Channel, Vec<u8>)> {
    let candidates: Vec<Channel> = match hint {
        ChannelChoice::Fixed(c) => return read_channel(stego.plane(c), key).map(|p| (c, p)),
        ChannelChoice::Auto => Channel::ALL.to_vec(),
    };
    candidates
        .into_iter()
        .find_map(|c| read_channel(stego.plane(c), key).ok().map(|p| (c, p)))
        .ok_or(Error::NoPayloadFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(c: char) -> CaesarKey {
        CaesarKey::new(c).unwrap()
    }

    #[test]
    fn stream_layout() {
        let s = build_digit_stream(b"a", key('k')).unwrap();
        assert_eq!(s.digits(), &[9, 7, 0, 0, 0, 0, 0, 0, 0, 1, 2, 0, 4]);
        assert_eq!(s.source_len(), 1);

        let empty = build_digit_stream(b"", key('k')).unwrap();
        assert_eq!(empty.digits(), &[9, 7, 0, 0, 0, 0, 0, 0, 0, 0]);

        let padded = build_digit_stream(&[3], key('A')).unwrap();
        assert_eq!(&padded.digits()[10..], &[0, 6, 8]);
    }

    #[test]
    fn header_rejects_oversized_length() {
        assert!(matches!(HeaderLayout::new(MAX_PAYLOAD_LEN + 1), Err(Error::PayloadTooLong(_))));
        let h = HeaderLayout::new(MAX_PAYLOAD_LEN).unwrap();
        assert_eq!(HeaderLayout::parse(&h.digits()), Some(h));
        assert_eq!(HeaderLayout::parse(&[9, 8, 0, 0, 0, 0, 0, 0, 0, 0]), None);
    }

    #[test]
    fn digit_replacement_examples() {
        assert_eq!(embed_digit(37, 5), 35);
        assert_eq!(embed_digit(3, 7), 7);
        assert_eq!(embed_digit(255, 9), 249);
        assert_eq!(embed_digit(255, 5), 255);
        assert_eq!(embed_digit(250, 6), 246);
        assert_eq!(extract_digit(127), 7);
        assert_eq!(extract_digit(0), 0);
    }

    /// Brute force over every sample value: the nearest value in 0..=255
    /// ending in `digit`.
    fn nearest_with_digit(pixel: u8, digit: u8) -> u8 {
        (0u8..=255).filter(|v| v % 10 == digit).min_by_key(|&v| (i16::from(v) - i16::from(pixel)).abs()).unwrap()
    }

    #[test]
    fn digit_replacement_exhaustive() {
        for p in 0..=255u8 {
            for d in 0..10u8 {
                let r = embed_digit(p, d);
                assert_eq!(r % 10, d);
                assert_eq!(extract_digit(r), d);
                let dist = (i16::from(r) - i16::from(p)).abs();
                assert!(dist <= 19);
                if u16::from(p) / 10 * 10 + u16::from(d) <= 255 {
                    assert!(dist <= 9);
                    assert_eq!(r, p / 10 * 10 + d);
                } else {
                    // Overflow pixels: dropping a ten is the closest legal value.
                    assert_eq!(r, nearest_with_digit(p, d), "p={p} d={d}");
                }
            }
        }
    }

    #[test]
    fn channel_with_matching_digits_is_free() {
        let blue: Vec<u8> = (0..16).map(|i| 50 + i).collect();
        let stream = build_digit_stream(b"", key('A')).unwrap();
        let mut planes = [blue, vec![33; 16], vec![128; 16]];
        for (p, &d) in planes[0].iter_mut().zip(stream.digits()) {
            *p = embed_digit(*p, d);
        }
        let g = PixelGrid::from_planes(4, 4, planes).unwrap();
        let (c, stds) = select_channel(&g, &stream).unwrap();
        assert_eq!(c, Channel::Blue);
        assert_eq!(stds[0], 0.0);
    }

    #[test]
    fn identical_planes_tie_to_blue() {
        let plane: Vec<u8> = (0..25).map(|i| (i * 37 % 256) as u8).collect();
        let g = PixelGrid::from_planes(5, 5, [plane.clone(), plane.clone(), plane]).unwrap();
        let stream = build_digit_stream(b"hi\x01", key('z')).unwrap();
        let (c, stds) = select_channel(&g, &stream).unwrap();
        assert_eq!(c, Channel::Blue);
        assert_eq!(stds[0], stds[1]);
        assert_eq!(stds[1], stds[2]);
    }

    /// Independent recomputation: build each candidate plane by string
    /// manipulation of the decimal representation, then take the
    /// population std of the differences in two passes.
    fn brute_force_select(planes: &[Vec<u8>; 3], digits: &[u8]) -> (usize, [f64; 3]) {
        let mut stds = [0.0; 3];
        for (c, plane) in planes.iter().enumerate() {
            let diffs: Vec<f64> = plane
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let Some(&d) = digits.get(i) else { return 0.0 };
                    let s = format!("{p:03}");
                    let mut v: i32 = format!("{}{}", &s[..2], d).parse().unwrap();
                    if v > 255 {
                        v -= 10;
                    }
                    f64::from(p) - f64::from(v)
                })
                .collect();
            let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64;
            stds[c] = var.sqrt();
        }
        let best = (0..3).fold(0, |b, c| if stds[c] < stds[b] { c } else { b });
        (best, stds)
    }

    #[test]
    fn three_by_three_matches_brute_force() {
        let planes = [(10..19).collect::<Vec<u8>>(), (0..9).map(|i| 100 + 5 * i).collect(), (200..209).collect()];
        let grid = PixelGrid::from_planes(3, 3, planes.clone()).unwrap();
        let stream = DigitStream { digits: vec![9; 9], source_len: 0 };
        let (c, stds) = select_channel(&grid, &stream).unwrap();
        let (oracle_c, oracle_stds) = brute_force_select(&planes, stream.digits());
        // Blue 10..18 -> 19 each: diffs -9..-1. Green alternates 100/105 -> 109.
        assert_eq!(c.index(), oracle_c);
        for i in 0..3 {
            assert!((stds[i] - oracle_stds[i]).abs() < 1e-12, "{stds:?} vs {oracle_stds:?}");
        }
    }

    #[test]
    fn capacity_bounds_on_256_square() {
        assert_eq!(capacity(256, 256), 21_842);
        let g = PixelGrid::filled(256, 256, [120, 121, 122]).unwrap();
        let k = key('k');
        assert!(embed(&g, &vec![b'x'; 19_000], k, false).is_ok());
        assert!(embed(&g, &vec![b'x'; 21_842], k, false).is_ok());
        assert!(matches!(
            embed(&g, &vec![b'x'; 21_843], k, false),
            Err(Error::CapacityExceeded { needed: 65_539, available: 65_536 })
        ));
    }

    #[test]
    fn grouped_digits_decode_to_letter() {
        let mut planes = [vec![0u8; 16], vec![0u8; 16], vec![0u8; 16]];
        let stream = [9, 7, 0, 0, 0, 0, 0, 0, 0, 1, 2, 0, 4];
        for (p, &d) in planes[2].iter_mut().zip(&stream) {
            *p = 130 + d;
        }
        let g = PixelGrid::from_planes(4, 4, planes).unwrap();
        assert_eq!(extract(&g, key('k'), ChannelChoice::Auto).unwrap(), b"a");
        assert_eq!(extract_located(&g, key('k'), ChannelChoice::Auto).unwrap().0, Channel::Red);
        assert!(extract(&g, key('k'), ChannelChoice::Fixed(Channel::Blue)).is_err());
    }

    #[test]
    fn hinted_extraction_surfaces_range_errors() {
        let g = PixelGrid::filled(8, 8, [100, 100, 100]).unwrap();
        let rec = embed_with(
            &g,
            &[0, 1, 2],
            key('A'),
            &EmbedOptions { channel: ChannelChoice::Fixed(Channel::Green), overlay: None },
        )
        .unwrap();
        assert_eq!(rec.channel, Channel::Green);
        let wrong = key('B');
        assert!(matches!(
            extract(&rec.stego, wrong, ChannelChoice::Fixed(Channel::Green)),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(extract(&rec.stego, wrong, ChannelChoice::Auto), Err(Error::NoPayloadFound)));
    }

    #[test]
    fn truncated_length_field_is_no_payload() {
        let mut planes = [vec![0u8; 12], vec![0u8; 12], vec![0u8; 12]];
        for (i, d) in [9u8, 7, 0, 0, 0, 0, 0, 0, 0, 5].iter().enumerate() {
            planes[0][i] = *d;
        }
        let g = PixelGrid::from_planes(4, 3, planes).unwrap();
        assert!(matches!(read_channel(g.plane(Channel::Blue), key('a')), Err(Error::NoPayloadFound)));
    }

    fn arb_grid() -> impl Strategy<Value = PixelGrid> {
        (4usize..24, 4usize..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h * 3)
                .prop_map(move |bgr| PixelGrid::from_bgr(w, h, &bgr).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip_and_locality(
            grid in arb_grid(),
            seed in proptest::collection::vec(any::<u8>(), 0..200),
            key_idx in 0usize..52,
        ) {
            let k = CaesarKey::all().nth(key_idx).unwrap();
            let cap = capacity(grid.width(), grid.height());
            let payload = &seed[..seed.len().min(cap)];
            let rec = embed(&grid, payload, k, false).unwrap();
            prop_assert_eq!(extract(&rec.stego, k, ChannelChoice::Auto).unwrap(), payload.to_vec());
            prop_assert_eq!(
                extract(&rec.stego, k, ChannelChoice::Fixed(rec.channel)).unwrap(),
                payload.to_vec()
            );

            let stream = build_digit_stream(payload, k).unwrap();
            for c in Channel::ALL {
                let (cover, stego) = (grid.plane(c), rec.stego.plane(c));
                if c != rec.channel {
                    prop_assert_eq!(cover, stego);
                    continue;
                }
                for i in 0..cover.len() {
                    match stream.digits().get(i) {
                        Some(&d) => {
                            prop_assert_eq!(stego[i] % 10, d);
                            prop_assert!((i16::from(stego[i]) - i16::from(cover[i])).abs() <= 19);
                        }
                        None => prop_assert_eq!(stego[i], cover[i]),
                    }
                }
            }
            let stds = rec.channel_stds;
            let best = (0..3).fold(0, |b, c| if stds[c] < stds[b] { c } else { b });
            prop_assert_eq!(best, rec.channel.index());
        }

        #[test]
        fn argmin_is_scale_invariant(stds in proptest::array::uniform3(0.0f64..50.0), scale in 0.01f64..100.0) {
            let argmin = |s: [f64; 3]| (0..3).fold(0, |b, c| if s[c] < s[b] { c } else { b });
            prop_assert_eq!(argmin(stds), argmin(stds.map(|s| s * scale)));
        }
    }
}
