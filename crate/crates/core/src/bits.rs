//! Fixed-length bit strings, most significant bit first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Longest bit string we represent; values are packed into a `u64`.
pub const MAX_BITS: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bit string is empty")]
    Empty,
    #[error("bit string longer than {MAX_BITS} bits")]
    TooLong,
    #[error("invalid character `{0}` in bit string")]
    InvalidChar(char),
    #[error("value {value} does not fit in {len} bits")]
    OutOfRange { value: u64, len: usize },
}

/// A bit string `m = (m_1, ..., m_k)` where `m_1` is the most significant bit of
/// [`BitString::value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    value: u64,
    len: usize,
}

impl BitString {
    pub fn new(value: u64, len: usize) -> Result<Self, BitsError> {
        if len == 0 {
            return Err(BitsError::Empty);
        }
        if len > MAX_BITS {
            return Err(BitsError::TooLong);
        }
        if value >> len != 0 {
            return Err(BitsError::OutOfRange { value, len });
        }
        Ok(Self { value, len })
    }

    pub fn zeros(len: usize) -> Result<Self, BitsError> {
        Self::new(0, len)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `i`-th bit, 1-based, `m_1` being the most significant.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len, "bit index {i} out of range");
        (self.value >> (self.len - i)) & 1 == 1
    }

    /// Inner product `m·m'` over GF(2).
    pub fn dot(&self, other: &BitString) -> bool {
        (self.value & other.value).count_ones() % 2 == 1
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        if self.len != other.len {
            return Err(BitsError::OutOfRange { value: other.value, len: self.len });
        }
        Ok(Self { value: self.value ^ other.value, len: self.len })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.value, width = self.len)
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(BitsError::Empty);
        }
        if s.len() > MAX_BITS {
            return Err(BitsError::TooLong);
        }
        let mut value = 0u64;
        for c in s.chars() {
            let bit = match c {
                '0' => 0,
                '1' => 1,
                other => return Err(BitsError::InvalidChar(other)),
            };
            value = (value << 1) | bit;
        }
        Ok(Self { value, len: s.len() })
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
