//! Bit strings: the common currency for programs, outputs and conditions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An ordered, finite sequence of bits.
///
/// Ordering is lexicographic with `false < true`, and a proper prefix sorts
/// before any of its extensions.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseBitsError {
    #[error("invalid character {ch:?} at position {pos} (expected '0' or '1')")]
    InvalidChar { ch: char, pos: usize },
}

impl BitString {
    pub const fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn with_capacity(cap: usize) -> Self {
        BitString(Vec::with_capacity(cap))
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// Parses a string of `0`/`1` characters. The empty string is ε.
    pub fn parse(s: &str) -> Result<Self, ParseBitsError> {
        s.chars()
            .enumerate()
            .map(|(pos, ch)| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError::InvalidChar { ch, pos }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }

    /// Like [`BitString::parse`] but accepts `-` as the empty string, the
    /// convention used in cache files and on the command line.
    pub fn parse_dash(s: &str) -> Result<Self, ParseBitsError> {
        if s == "-" {
            Ok(BitString::new())
        } else {
            Self::parse(s)
        }
    }

    /// Renders ε as `-`, everything else as `0`/`1` characters.
    pub fn to_dash_string(&self) -> String {
        if self.is_empty() {
            "-".to_owned()
        } else {
            self.to_string()
        }
    }

    /// The big-endian bits of `value`, `width` of them.
    pub fn from_uint(value: u64, width: usize) -> Self {
        BitString((0..width).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn pop(&mut self) -> Option<bool> {
        self.0.pop()
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = bool> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    /// `self` followed by one more bit.
    pub fn with(&self, bit: bool) -> BitString {
        let mut out = BitString::with_capacity(self.len() + 1);
        out.extend_from(self);
        out.push(bit);
        out
    }

    pub fn prefix(&self, len: usize) -> BitString {
        BitString(self.0[..len].to_vec())
    }

    pub fn starts_with(&self, prefix: &BitString) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && other.starts_with(self)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        f.pad(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BitString::parse(s)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString(iter.into_iter().collect())
    }
}

impl From<&[bool]> for BitString {
    fn from(bits: &[bool]) -> Self {
        BitString(bits.to_vec())
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        BitString::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Shorthand used throughout the tests: `bits("0101")`.
///
/// Panics on anything but `0`/`1` characters.
pub fn bits(s: &str) -> BitString {
    BitString::parse(s).expect("literal bit string")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        assert_eq!(bits("0110").to_string(), "0110");
        assert_eq!(BitString::parse("").unwrap(), BitString::new());
        assert_eq!(
            BitString::parse("01x"),
            Err(ParseBitsError::InvalidChar { ch: 'x', pos: 2 })
        );
        assert_eq!(BitString::parse_dash("-").unwrap(), BitString::new());
        assert_eq!(BitString::new().to_dash_string(), "-");
    }

    #[test]
    fn ordering_is_lexicographic() {
        assert!(bits("") < bits("0"));
        assert!(bits("0") < bits("00"));
        assert!(bits("01") < bits("1"));
        assert!(bits("011") < bits("100"));
    }

    #[test]
    fn prefix_relations() {
        assert!(bits("01").is_proper_prefix_of(&bits("011")));
        assert!(!bits("011").is_proper_prefix_of(&bits("011")));
        assert!(bits("").is_proper_prefix_of(&bits("0")));
        assert_eq!(BitString::from_uint(5, 4), bits("0101"));
    }
}
