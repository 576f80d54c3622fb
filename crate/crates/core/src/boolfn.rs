//! Truth-table Boolean functions `F: {0,1}^k → {0,1}^n`, the protocol's keys.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bits::BitString;

/// Largest supported input arity `k`.
pub const MAX_ARITY: usize = 16;
/// Largest supported output width `n`.
pub const MAX_WIDTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoolFnError {
    #[error("arity {0} outside 1..={MAX_ARITY}")]
    BadArity(usize),
    #[error("output width {0} outside 1..={MAX_WIDTH}")]
    BadWidth(usize),
    #[error("truth table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("table entry {value:#x} does not fit in {width} output bits")]
    EntryOutOfRange { value: u64, width: usize },
    #[error("input has {got} bits, function expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("shape mismatch: {0}:{1} vs {2}:{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("permutation test needs arity = width, got {0}:{1}")]
    NotApplicable(usize, usize),
    #[error("malformed truth table `{0}`")]
    Malformed(String),
}

/// A `k`-input, `n`-output Boolean function stored as its truth table.
/// `table[m]` holds `F(m)` with `m` read most-significant-bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    arity: usize,
    width: usize,
    table: Vec<u64>,
}

fn check_shape(arity: usize, width: usize) -> Result<(), BoolFnError> {
    if arity == 0 || arity > MAX_ARITY {
        return Err(BoolFnError::BadArity(arity));
    }
    if width == 0 || width > MAX_WIDTH {
        return Err(BoolFnError::BadWidth(width));
    }
    Ok(())
}

impl BooleanFunction {
    pub fn new(arity: usize, width: usize, table: Vec<u64>) -> Result<Self, BoolFnError> {
        check_shape(arity, width)?;
        if table.len() != 1 << arity {
            return Err(BoolFnError::TableLength { expected: 1 << arity, got: table.len() });
        }
        if let Some(&value) = table.iter().find(|&&v| v >> width != 0) {
            return Err(BoolFnError::EntryOutOfRange { value, width });
        }
        Ok(Self { arity, width, table })
    }

    pub fn from_fn(arity: usize, width: usize, f: impl Fn(u64) -> u64) -> Result<Self, BoolFnError> {
        check_shape(arity, width)?;
        Self::new(arity, width, (0..1u64 << arity).map(f).collect())
    }

    pub fn constant(arity: usize, width: usize, value: u64) -> Result<Self, BoolFnError> {
        check_shape(arity, width)?;
        Self::new(arity, width, vec![value; 1 << arity])
    }

    pub fn zero(arity: usize, width: usize) -> Result<Self, BoolFnError> {
        Self::constant(arity, width, 0)
    }

    pub fn identity(arity: usize) -> Result<Self, BoolFnError> {
        Self::from_fn(arity, arity, |m| m)
    }

    /// The single-bit functions `0`, `1`, `x`, `x̄` by name (`0`, `1`, `x`, `xbar`).
    pub fn named(name: &str) -> Option<Self> {
        let table = match name {
            "0" => vec![0, 0],
            "1" => vec![1, 1],
            "x" => vec![0, 1],
            "xbar" | "x̄" | "!x" => vec![1, 0],
            _ => return None,
        };
        Some(Self { arity: 1, width: 1, table })
    }

    /// Parses either a single-bit shorthand (see [`named`](Self::named)) or
    /// the hex truth-table format.
    pub fn parse_spec(spec: &str) -> Result<Self, BoolFnError> {
        Self::named(spec.trim()).map_or_else(|| spec.parse(), Ok)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    /// `F(m)` for an input given as a table index.
    pub fn eval_index(&self, m: u64) -> u64 {
        self.table[m as usize]
    }

    pub fn eval(&self, m: &BitString) -> Result<BitString, BoolFnError> {
        if m.len() != self.arity {
            return Err(BoolFnError::InputLength { expected: self.arity, got: m.len() });
        }
        Ok(BitString::new(self.eval_index(m.value()), self.width).expect("entries fit the width"))
    }

    fn same_shape(&self, other: &Self) -> Result<(), BoolFnError> {
        if self.arity != other.arity || self.width != other.width {
            return Err(BoolFnError::ShapeMismatch(self.arity, self.width, other.arity, other.width));
        }
        Ok(())
    }

    /// Pointwise XOR, `(F ⊕ G)(m) = F(m) ⊕ G(m)`.
    pub fn xor(&self, other: &Self) -> Result<Self, BoolFnError> {
        self.same_shape(other)?;
        Ok(Self {
            arity: self.arity,
            width: self.width,
            table: self.table.iter().zip(&other.table).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|&v| v == 0)
    }

    /// Whether the table is a bijection on `2^k` values. Only defined when
    /// arity equals width.
    pub fn is_permutation(&self) -> Result<bool, BoolFnError> {
        if self.arity != self.width {
            return Err(BoolFnError::NotApplicable(self.arity, self.width));
        }
        let mut seen = vec![false; self.table.len()];
        for &v in &self.table {
            if std::mem::replace(&mut seen[v as usize], true) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Inverse permutation; `None` unless [`is_permutation`](Self::is_permutation).
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_permutation().unwrap_or(false) {
            return None;
        }
        let mut table = vec![0; self.table.len()];
        for (m, &v) in self.table.iter().enumerate() {
            table[v as usize] = m as u64;
        }
        Some(Self { arity: self.arity, width: self.width, table })
    }

    /// Uniformly random function: every table entry i.i.d. uniform over
    /// `[0, 2^n)`.
    pub fn random(arity: usize, width: usize, seed: u64) -> Result<Self, BoolFnError> {
        Self::random_with(arity, width, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn random_with<R: Rng + ?Sized>(arity: usize, width: usize, rng: &mut R) -> Result<Self, BoolFnError> {
        check_shape(arity, width)?;
        let table = (0..1usize << arity).map(|_| rng.random_range(0..1u64 << width)).collect();
        Ok(Self { arity, width, table })
    }

    /// All `2^(n·2^k)` functions of the given shape, in table-lexicographic
    /// order. `None` when there are more than `limit`.
    pub fn enumerate_all(arity: usize, width: usize, limit: usize) -> Result<Option<Vec<Self>>, BoolFnError> {
        check_shape(arity, width)?;
        let bits = width << arity;
        if bits >= usize::BITS as usize || (1usize << bits) > limit {
            return Ok(None);
        }
        let entries = 1usize << arity;
        let mask = (1u64 << width) - 1;
        Ok(Some(
            (0..1u64 << bits)
                .map(|code| {
                    let table = (0..entries)
                        .map(|m| (code >> ((entries - 1 - m) * width)) & mask)
                        .collect();
                    Self { arity, width, table }
                })
                .collect(),
        ))
    }
}

impl fmt::Display for BooleanFunction {
    /// `k:n:` followed by comma-separated hex entries of fixed width `⌈n/4⌉`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.width.div_ceil(4);
        write!(f, "{}:{}:", self.arity, self.width)?;
        for (i, v) in self.table.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v:0digits$x}")?;
        }
        Ok(())
    }
}

impl FromStr for BooleanFunction {
    type Err = BoolFnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || BoolFnError::Malformed(s.to_string());
        let mut parts = s.trim().splitn(3, ':');
        let arity: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(malformed)?;
        let width: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(malformed)?;
        let body = parts.next().ok_or_else(malformed)?;
        check_shape(arity, width)?;
        let digits = width.div_ceil(4);
        let table = body
            .split(',')
            .map(|e| {
                let e = e.trim();
                if e.len() != digits {
                    return Err(malformed());
                }
                u64::from_str_radix(e, 16).map_err(|_| malformed())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(arity, width, table)
    }
}

impl Serialize for BooleanFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BooleanFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A session function together with a preshared identification key of the
/// same shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPair {
    f: BooleanFunction,
    s: BooleanFunction,
}

impl KeyPair {
    pub fn new(f: BooleanFunction, s: BooleanFunction) -> Result<Self, BoolFnError> {
        f.same_shape(&s)?;
        Ok(Self { f, s })
    }

    pub fn session(&self) -> &BooleanFunction {
        &self.f
    }

    pub fn id_key(&self) -> &BooleanFunction {
        &self.s
    }
}
