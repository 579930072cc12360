//! Symbolic systems handled exactly at the level of cylinders: the full shift
//! over a finite alphabet and the dyadic odometer.
//!
//! Words are stored LSB-first: `symbols[0]` is the first coordinate `x_1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{FiniteSystem, Metric};

/// Largest truncation depth for which an odometer truncation is materialized.
pub const MAX_TRUNCATION_DEPTH: u32 = 24;

/// A finite word `(x_1, …, x_n)` naming the cylinder `[x_1, …, x_n]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    pub fn zeros(len: usize) -> Self {
        Word(vec![0; len])
    }

    /// The word whose base-`alphabet` LSB-first value is `value`.
    pub fn from_index(mut value: u64, len: usize, alphabet: u8) -> Self {
        let a = alphabet as u64;
        let mut symbols = Vec::with_capacity(len);
        for _ in 0..len {
            symbols.push((value % a) as u8);
            value /= a;
        }
        Word(symbols)
    }

    /// LSB-first value in base `alphabet`.
    pub fn index(&self, alphabet: u8) -> u64 {
        self.0.iter().rev().fold(0u64, |acc, &s| acc * alphabet as u64 + s as u64)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    fn check_binary(&self) -> Result<()> {
        match self.0.iter().find(|&&s| s > 1) {
            Some(s) => Err(Error::InvalidWord(format!("symbol {s} in a binary word"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for s in &self.0 {
            if *s < 10 {
                write!(f, "{s}")?;
            } else {
                write!(f, "({s})")?;
            }
        }
        write!(f, "]")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Digits written in coordinate order, e.g. `"110"` is `(1,1,0)`.
    /// Surrounding brackets are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        if body.is_empty() {
            return Err(Error::InvalidWord("empty word".into()));
        }
        body.chars()
            .filter(|c| *c != ',' && !c.is_whitespace())
            .map(|c| {
                c.to_digit(36).map(|d| d as u8).ok_or_else(|| Error::InvalidWord(format!("bad symbol `{c}` in `{s}`")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

/// Dyadic addition with carry, LSB first; the final carry is discarded so
/// the result is addition modulo `2^len`.
pub fn odometer_add(x: &Word, y: &Word) -> Result<Word> {
    if x.len() != y.len() {
        return Err(Error::UnequalLengths { left: x.len(), right: y.len() });
    }
    x.check_binary()?;
    y.check_binary()?;
    let mut carry = 0u8;
    let symbols =
        x.0.iter()
            .zip(&y.0)
            .map(|(&a, &b)| {
                let s = a + b + carry;
                if s >= 2 {
                    carry = 1;
                    s - 2
                } else {
                    carry = 0;
                    s
                }
            })
            .collect();
    Ok(Word(symbols))
}

/// `z ⊕ (1, 0, 0, …)` truncated to the length of `z`.
pub fn odometer_step(z: &Word) -> Result<Word> {
    if z.is_empty() {
        return Ok(z.clone());
    }
    let mut one = Word::zeros(z.len());
    one.0[0] = 1;
    odometer_add(z, &one)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CylinderSystem {
    /// One-sided full shift over `alphabet` symbols.
    FullShift { alphabet: u8 },
    /// Dyadic adding machine `z ↦ z ⊕ 1`.
    Odometer,
}

impl CylinderSystem {
    pub fn alphabet(&self) -> u8 {
        match self {
            CylinderSystem::FullShift { alphabet } => *alphabet,
            CylinderSystem::Odometer => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CylinderSystem::FullShift { .. } => "full-shift",
            CylinderSystem::Odometer => "odometer",
        }
    }

    pub fn validate_word(&self, w: &Word) -> Result<()> {
        if w.is_empty() {
            return Err(Error::InvalidWord("cylinders need at least one coordinate".into()));
        }
        let a = self.alphabet();
        match w.0.iter().find(|&&s| s >= a) {
            Some(s) => Err(Error::InvalidWord(format!("symbol {s} outside an alphabet of {a}"))),
            None => Ok(()),
        }
    }

    /// Image of the cylinder `[w]`: the odometer maps `[w]` onto `[w ⊕ 1]`,
    /// the shift maps `[x_1 … x_n]` onto `[x_2 … x_n]`.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        self.validate_word(w)?;
        match self {
            CylinderSystem::Odometer => odometer_step(w),
            CylinderSystem::FullShift { .. } => Ok(Word(w.0[1..].to_vec())),
        }
    }

    /// All cylinders of length `len`, ordered by LSB-first value.
    pub fn cylinders(&self, len: usize) -> Vec<Word> {
        let a = self.alphabet();
        let count = (a as u64).pow(len as u32);
        (0..count).map(|v| Word::from_index(v, len, a)).collect()
    }

    /// All cylinders of length `1..=max_len`, shortest first.
    pub fn cylinders_up_to(&self, max_len: usize) -> Vec<Word> {
        (1..=max_len).flat_map(|l| self.cylinders(l)).collect()
    }
}

/// The odometer acting on words of length `depth`: `+1 mod 2^depth` with the
/// dyadic prefix metric. Point `i` is the word with LSB-first value `i`.
pub fn odometer_truncation(depth: u32) -> Result<FiniteSystem> {
    if depth == 0 || depth > MAX_TRUNCATION_DEPTH {
        return Err(Error::ParamOutOfRange {
            name: "odometer depth".into(),
            param: depth as u64,
            range: format!("1..={MAX_TRUNCATION_DEPTH}"),
        });
    }
    let n = 1usize << depth;
    let map = (0..n).map(|i| (i + 1) & (n - 1)).collect();
    FiniteSystem::new(map, Metric::Dyadic { depth }, true)
}

/// Indices of the depth-`depth` truncation lying in the cylinder `[w]`.
pub fn cylinder_points(depth: u32, w: &Word) -> Result<Vec<usize>> {
    w.check_binary()?;
    if w.is_empty() || w.len() > depth as usize {
        return Err(Error::InvalidWord(format!("cylinder {w} does not fit depth {depth}")));
    }
    let base = w.index(2) as usize;
    let stride = 1usize << w.len();
    Ok((base..1usize << depth).step_by(stride).collect())
}
