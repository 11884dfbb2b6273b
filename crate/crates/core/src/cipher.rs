//! Additive Caesar shift keyed by a single ASCII letter.
//!
//! The shift is plain addition with no wraparound, so an encrypted byte lies
//! in `65..=377` and always fits three decimal digits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A single-letter key; its offset is the letter's ASCII code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CaesarKey(u8);

impl CaesarKey {
    pub fn new(key: char) -> Result<Self> {
        if key.is_ascii_alphabetic() {
            Ok(Self(key as u8))
        } else {
            Err(Error::InvalidKey(key.to_string()))
        }
    }

    pub fn offset(self) -> u8 {
        self.0
    }

    pub fn as_char(self) -> char {
        self.0 as char
    }

    /// All 52 valid keys, `A..=Z` then `a..=z`.
    pub fn all() -> impl Iterator<Item = CaesarKey> {
        (b'A'..=b'Z').chain(b'a'..=b'z').map(CaesarKey)
    }
}

impl TryFrom<char> for CaesarKey {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        Self::new(c)
    }
}

impl FromStr for CaesarKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Self::new(c),
            _ => Err(Error::InvalidKey(s.to_string())),
        }
    }
}

impl fmt::Display for CaesarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Encrypted payload values, each `plain + offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherText(pub Vec<u16>);

impl CipherText {
    pub fn values(&self) -> &[u16] {
        &self.0
    }
}

pub fn encrypt(plain: &[u8], key: CaesarKey) -> CipherText {
    CipherText(plain.iter().map(|&b| u16::from(b) + u16::from(key.offset())).collect())
}

/// Inverse of a single shifted value.
pub fn decrypt_value(value: u16, key: CaesarKey) -> Result<u8> {
    value
        .checked_sub(u16::from(key.offset()))
        .and_then(|v| u8::try_from(v).ok())
        .ok_or(Error::OutOfRange { value, offset: key.offset() })
}

pub fn decrypt(ct: &CipherText, key: CaesarKey) -> Result<Vec<u8>> {
    ct.0.iter().map(|&v| decrypt_value(v, key)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(c: char) -> CaesarKey {
        CaesarKey::new(c).unwrap()
    }

    #[test]
    fn shifts_by_ascii_code() {
        assert_eq!(encrypt(&[97], key('k')).0, vec![204]);
        assert_eq!(encrypt(&[0], key('A')).0, vec![65]);
        assert_eq!(b"abcd".to_vec(), vec![97, 98, 99, 100]);
    }

    #[test]
    fn decrypt_inverts_and_rejects_underflow() {
        assert_eq!(decrypt_value(204, key('k')).unwrap(), 97);
        assert_eq!(decrypt_value(65, key('A')).unwrap(), 0);
        assert!(matches!(decrypt_value(64, key('A')), Err(Error::OutOfRange { value: 64, offset: 65 })));
        assert!(decrypt_value(255 + 66, key('A')).is_err());
    }

    #[test]
    fn key_must_be_a_letter() {
        for bad in ['1', ' ', '@', '[', '`', '{', 'é'] {
            assert!(matches!(CaesarKey::new(bad), Err(Error::InvalidKey(_))), "{bad:?}");
        }
        assert!("ab".parse::<CaesarKey>().is_err());
        assert!("".parse::<CaesarKey>().is_err());
        assert_eq!("Z".parse::<CaesarKey>().unwrap().offset(), 90);
        assert_eq!(CaesarKey::all().count(), 52);
    }

    #[test]
    fn exhaustive_round_trip_and_width() {
        let plain: Vec<u8> = (0..=255).collect();
        for k in CaesarKey::all() {
            let ct = encrypt(&plain, k);
            assert!(ct.values().iter().all(|&v| (65..=377).contains(&v)));
            assert!(ct.values().iter().all(|&v| format!("{v:03}").len() == 3));
            assert_eq!(decrypt(&ct, k).unwrap(), plain);
        }
    }
}
