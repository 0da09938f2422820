//! Signed base-N digit expansions and prefix-filtered frequency sets.
//!
//! Every integer has a unique eventually-constant base-N digit sequence: a
//! nonnegative integer ends in zeros, a negative one in `N-1`s. The canonical
//! [`DigitExpansion`] stores the minimal prefix before the constant tail.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("expansion base must be at least 2, got {0}")]
    BaseTooSmall(u64),
    #[error("digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u64 },
    #[error("non-canonical expansion: prefix ends with the tail digit {0}")]
    NonCanonical(u32),
    #[error("frequency set has base {set_base}, expected {expected}")]
    BaseMismatch { set_base: u64, expected: u64 },
}

/// The constant tail of an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tail {
    AllZero,
    AllNMinusOne,
}

/// Canonical eventually-constant base-N expansion of an integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitExpansion {
    base: u64,
    prefix: Vec<u32>,
    tail: Tail,
}

impl DigitExpansion {
    /// Validates digit ranges and canonicality (the stored prefix must not end
    /// with the tail digit).
    pub fn new(base: u64, prefix: Vec<u32>, tail: Tail) -> Result<Self, ExpansionError> {
        if base < 2 {
            return Err(ExpansionError::BaseTooSmall(base));
        }
        for &d in &prefix {
            if d as u64 >= base {
                return Err(ExpansionError::DigitOutOfRange { digit: d, base });
            }
        }
        let tail_digit = tail_digit(base, tail);
        if prefix.last() == Some(&tail_digit) {
            return Err(ExpansionError::NonCanonical(tail_digit));
        }
        Ok(DigitExpansion { base, prefix, tail })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn prefix(&self) -> &[u32] {
        &self.prefix
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// The digit at position `idx` (the tail digit beyond the prefix).
    pub fn digit(&self, idx: usize) -> u32 {
        self.prefix
            .get(idx)
            .copied()
            .unwrap_or_else(|| tail_digit(self.base, self.tail))
    }

    /// Dot-separated prefix digits, then a bar and the tail digit, e.g.
    /// `5.2.6|0` for 405 in base 8 and `|7` for -1.
    pub fn render(&self) -> String {
        let digits: Vec<String> = self.prefix.iter().map(|d| d.to_string()).collect();
        format!("{}|{}", digits.join("."), tail_digit(self.base, self.tail))
    }
}

fn tail_digit(base: u64, tail: Tail) -> u32 {
    match tail {
        Tail::AllZero => 0,
        Tail::AllNMinusOne => (base - 1) as u32,
    }
}

/// Expand an integer into its canonical base-N digit sequence.
///
/// Each step peels `k = d + N * k'` with `0 <= d < N`; nonnegative inputs
/// reach the fixed point 0, negative inputs the fixed point -1 (all further
/// digits `N-1`). The loop stops exactly at the fixed point, so the stored
/// prefix is minimal.
pub fn expand(k: &BigInt, base: u64) -> Result<DigitExpansion, ExpansionError> {
    if base < 2 {
        return Err(ExpansionError::BaseTooSmall(base));
    }
    if let Some(k) = k.to_i128() {
        if k > i128::MIN / 2 {
            return expand_small(k, base);
        }
    }
    let big_base = BigInt::from(base);
    let mut prefix = Vec::new();
    let mut current = k.clone();
    let minus_one = BigInt::from(-1);
    loop {
        if current.is_zero() {
            return Ok(DigitExpansion {
                base,
                prefix,
                tail: Tail::AllZero,
            });
        }
        if current == minus_one {
            return Ok(DigitExpansion {
                base,
                prefix,
                tail: Tail::AllNMinusOne,
            });
        }
        let (quot, rem) = current.div_mod_floor(&big_base);
        prefix.push(rem.to_u32().expect("digit below base fits in u32"));
        current = quot;
    }
}

/// Fast path for machine-sized integers.
pub fn expand_i64(k: i64, base: u64) -> Result<DigitExpansion, ExpansionError> {
    if base < 2 {
        return Err(ExpansionError::BaseTooSmall(base));
    }
    expand_small(k as i128, base)
}

fn expand_small(mut k: i128, base: u64) -> Result<DigitExpansion, ExpansionError> {
    let base = base as i128;
    let mut prefix = Vec::with_capacity(24);
    loop {
        if k == 0 {
            return Ok(DigitExpansion {
                base: base as u64,
                prefix,
                tail: Tail::AllZero,
            });
        }
        if k == -1 {
            return Ok(DigitExpansion {
                base: base as u64,
                prefix,
                tail: Tail::AllNMinusOne,
            });
        }
        let mut d = k % base;
        if d < 0 {
            d += base;
        }
        prefix.push(d as u32);
        k = (k - d) / base;
    }
}

/// Reconstruct the integer from its canonical expansion (inverse of [`expand`]).
pub fn collapse(e: &DigitExpansion) -> BigInt {
    let base = BigInt::from(e.base);
    let mut acc = match e.tail {
        Tail::AllZero => BigInt::zero(),
        // sum_{i >= L} (N-1) N^i collapses to -N^L.
        Tail::AllNMinusOne => BigInt::from(-1),
    };
    for &d in e.prefix.iter().rev() {
        acc = acc * &base + d;
    }
    acc
}

/// The digit `d_idx(k)` of the canonical base-N expansion of `k`.
pub fn digit_at(k: &BigInt, base: u64, idx: usize) -> Result<u32, ExpansionError> {
    Ok(expand(k, base)?.digit(idx))
}

/// A finite set of integer frequencies together with the expansion base used
/// to address them by digit prefixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencySet {
    base: u64,
    elements: BTreeSet<BigInt>,
}

impl FrequencySet {
    pub fn new(
        base: u64,
        elements: impl IntoIterator<Item = BigInt>,
    ) -> Result<Self, ExpansionError> {
        if base < 2 {
            return Err(ExpansionError::BaseTooSmall(base));
        }
        Ok(FrequencySet {
            base,
            elements: elements.into_iter().collect(),
        })
    }

    pub fn from_i64s(
        base: u64,
        elements: impl IntoIterator<Item = i64>,
    ) -> Result<Self, ExpansionError> {
        Self::new(base, elements.into_iter().map(BigInt::from))
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, k: &BigInt) -> bool {
        self.elements.contains(k)
    }

    /// Ascending iteration.
    pub fn iter(&self) -> impl Iterator<Item = &BigInt> {
        self.elements.iter()
    }

    pub fn min(&self) -> Option<&BigInt> {
        self.elements.first()
    }

    pub fn max(&self) -> Option<&BigInt> {
        self.elements.last()
    }

    /// The subset whose first `digits.len()` expansion digits equal `digits`;
    /// an empty prefix returns the whole set.
    pub fn prefix_subset(&self, digits: &[u32]) -> Result<FrequencySet, ExpansionError> {
        for &d in digits {
            if d as u64 >= self.base {
                return Err(ExpansionError::DigitOutOfRange {
                    digit: d,
                    base: self.base,
                });
            }
        }
        let elements = self
            .elements
            .iter()
            .filter(|k| {
                let e = expand(k, self.base).expect("base already validated");
                digits.iter().enumerate().all(|(i, &d)| e.digit(i) == d)
            })
            .cloned()
            .collect();
        Ok(FrequencySet {
            base: self.base,
            elements,
        })
    }
}
