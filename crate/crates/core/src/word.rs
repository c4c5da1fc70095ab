//! Finite words over a finite alphabet and the periodic points of the
//! two-sided full shift they generate.
//!
//! Conventions used throughout the crate:
//! - symbols are `u8` values in `0..alphabet`, printed base-36 (`0-9a-z`);
//! - a word `w` of length `p` defines the periodic point `x` with
//!   `x_k = w[(phase + k) mod p]` for all integer `k`;
//! - the metric is symmetric: `d(x, y) = base^(-r)` where `r` is the
//!   smallest `|k|` with `x_k != y_k` (so the diameter is 1, attained by a
//!   mismatch at the origin), and `d = 0` for equal points.

use crate::error::{Error, Result};
use std::collections::HashSet;
use std::fmt;

/// Non-empty finite word over `{0, .., alphabet-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<u8>,
    alphabet: usize,
}

impl Word {
    pub fn new(symbols: Vec<u8>, alphabet: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        if alphabet < 1 || alphabet > 36 {
            return Err(Error::BadParameter(format!("alphabet size {alphabet} out of range 1..=36")));
        }
        for &s in &symbols {
            if (s as usize) >= alphabet {
                return Err(Error::SymbolOutOfRange { symbol: s as usize, alphabet });
            }
        }
        Ok(Word { symbols, alphabet })
    }

    /// Parses a base-36 digit string, e.g. `"0120"` over alphabet 3.
    pub fn parse(text: &str, alphabet: usize) -> Result<Self> {
        let mut symbols = Vec::with_capacity(text.len());
        for ch in text.chars() {
            let v = ch
                .to_digit(36)
                .ok_or_else(|| Error::BadParameter(format!("invalid symbol character {ch:?}")))?;
            symbols.push(v as u8);
        }
        Word::new(symbols, alphabet)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty words
    }

    /// Period of the generated shift point (= word length; not reduced).
    #[inline]
    pub fn period(&self) -> u64 {
        self.symbols.len() as u64
    }

    #[inline]
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    #[inline]
    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Symbol at position `t` of the periodic extension, `t` arbitrary.
    #[inline]
    pub fn cyclic(&self, t: i64) -> u8 {
        let p = self.symbols.len() as i64;
        self.symbols[(t.rem_euclid(p)) as usize]
    }

    #[inline]
    pub fn cyclic_u(&self, t: u64) -> u8 {
        self.symbols[(t % self.period()) as usize]
    }

    /// The word read starting `k` positions later (cyclic left rotation).
    pub fn rotate(&self, k: u64) -> Word {
        let p = self.symbols.len();
        let k = (k % p as u64) as usize;
        let mut symbols = Vec::with_capacity(p);
        symbols.extend_from_slice(&self.symbols[k..]);
        symbols.extend_from_slice(&self.symbols[..k]);
        Word { symbols, alphabet: self.alphabet }
    }

    pub fn repeat(&self, times: usize) -> Word {
        assert!(times >= 1);
        let mut symbols = Vec::with_capacity(self.symbols.len() * times);
        for _ in 0..times {
            symbols.extend_from_slice(&self.symbols);
        }
        Word { symbols, alphabet: self.alphabet }
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if other.alphabet != self.alphabet {
            return Err(Error::AlphabetMismatch {
                word_alphabet: other.alphabet,
                cocycle_alphabet: self.alphabet,
            });
        }
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Word { symbols, alphabet: self.alphabet })
    }

    /// Shortest word `r` with `self = r^k`; returns `self` when primitive.
    pub fn primitive_root(&self) -> Word {
        let n = self.symbols.len();
        for p in 1..=n {
            if n % p != 0 {
                continue;
            }
            if (p..n).all(|j| self.symbols[j] == self.symbols[j - p]) {
                return Word { symbols: self.symbols[..p].to_vec(), alphabet: self.alphabet };
            }
        }
        unreachable!("p = n always repeats")
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive_root().len() == self.symbols.len()
    }

    /// The multiset of length-`len` cyclic factors as (factor, frequency),
    /// frequencies summing to 1. Factor order is lexicographic.
    pub fn cylinder_frequencies(&self, len: usize) -> Vec<(Vec<u8>, f64)> {
        assert!(len >= 1);
        let p = self.symbols.len();
        let mut counts: std::collections::BTreeMap<Vec<u8>, u64> = Default::default();
        for start in 0..p {
            let mut f = Vec::with_capacity(len);
            for j in 0..len {
                f.push(self.symbols[(start + j) % p]);
            }
            *counts.entry(f).or_insert(0) += 1;
        }
        counts
            .into_iter()
            .map(|(f, c)| (f, c as f64 / p as f64))
            .collect()
    }

    /// Does every word of length `len` occur as a cyclic factor?
    pub fn covers_all_factors(&self, len: usize) -> bool {
        let total = (self.alphabet as u128).checked_pow(len as u32);
        let total = match total {
            Some(t) if t <= self.symbols.len() as u128 => t,
            _ => return false, // pigeonhole: cannot cover
        };
        let p = self.symbols.len();
        let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(p);
        for start in 0..p {
            let mut f = Vec::with_capacity(len);
            for j in 0..len {
                f.push(self.symbols[(start + j) % p]);
            }
            seen.insert(f);
        }
        seen.len() as u128 == total
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            write!(f, "{}", char::from_digit(s as u32, 36).unwrap())?;
        }
        Ok(())
    }
}

/// A periodic point of the full shift: the periodic extension of `word`
/// read from position `phase`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftPoint {
    pub word: Word,
    pub phase: u64,
}

impl ShiftPoint {
    pub fn new(word: Word, phase: u64) -> Self {
        let phase = phase % word.period();
        ShiftPoint { word, phase }
    }

    #[inline]
    pub fn symbol(&self, k: i64) -> u8 {
        self.word.cyclic(self.phase as i64 + k)
    }

    /// Image under the shift map (reads one position later).
    pub fn shifted(&self, k: u64) -> ShiftPoint {
        ShiftPoint::new(self.word.clone(), self.phase + k)
    }

    pub fn period(&self) -> u64 {
        self.word.period()
    }
}

/// Symmetric shift metric `base^(-min |k| with mismatch)`; 0 for equal points.
///
/// Both points are periodic, so equality is decided on a window of length
/// `lcm` of the two periods.
pub fn shift_distance(x: &ShiftPoint, y: &ShiftPoint, base: f64) -> Result<f64> {
    if base <= 1.0 || !base.is_finite() {
        return Err(Error::BadMetricBase { base });
    }
    let l = lcm_capped(x.period(), y.period(), 1 << 22) as i64;
    for r in 0..=l {
        if x.symbol(r) != y.symbol(r) || x.symbol(-r) != y.symbol(-r) {
            return Ok(base.powi(-(r as i32)));
        }
    }
    Ok(0.0)
}

/// Smallest `r >= 0` such that `base^(-r) < gamma`; agreement of two points
/// on all `|k| <= r - 1` then forces `d < gamma`.
pub fn match_radius(gamma: f64, base: f64) -> Result<u32> {
    if base <= 1.0 || !base.is_finite() {
        return Err(Error::BadMetricBase { base });
    }
    if !(gamma > 0.0) || gamma > 1.0 {
        return Err(Error::BadParameter(format!("gamma {gamma} outside (0, 1]")));
    }
    let mut r = 0u32;
    let mut v = 1.0;
    // Loop, not logs: avoids boundary misclassification at exact powers.
    while v >= gamma {
        r += 1;
        v /= base;
        if r > 4096 {
            return Err(Error::BadParameter(format!("gamma {gamma} too small for base {base}")));
        }
    }
    Ok(r)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm_capped(a: u64, b: u64, cap: u64) -> u64 {
    let g = gcd(a, b);
    let l = (a / g).saturating_mul(b);
    l.min(cap)
}

/// Cyclic de Bruijn sequence of the given order: every word of length
/// `order` occurs exactly once cyclically. Length `alphabet^order`.
/// Standard Lyndon-word (FKM) construction; lexicographically least cycle.
pub fn de_bruijn_cycle(alphabet: usize, order: usize) -> Vec<u8> {
    assert!(alphabet >= 1 && alphabet <= 36 && order >= 1);
    if alphabet == 1 {
        return vec![0];
    }
    let mut a = vec![0u8; alphabet * order + 1];
    let mut seq = Vec::new();
    db(1, 1, alphabet, order, &mut a, &mut seq);
    seq
}

fn db(t: usize, p: usize, k: usize, n: usize, a: &mut [u8], seq: &mut Vec<u8>) {
    if t > n {
        if n % p == 0 {
            seq.extend_from_slice(&a[1..=p]);
        }
    } else {
        a[t] = a[t - p];
        db(t + 1, p, k, n, a, seq);
        for j in (a[t - p] + 1)..(k as u8) {
            a[t] = j;
            db(t + 1, t, k, n, a, seq);
        }
    }
}

/// De Bruijn cycle with its first `order - 1` symbols appended, so every
/// word of length `order` occurs inside the *linear* sequence.
pub fn de_bruijn_linear(alphabet: usize, order: usize) -> Vec<u8> {
    let mut seq = de_bruijn_cycle(alphabet, order);
    if alphabet >= 2 {
        let head: Vec<u8> = seq[..order - 1].to_vec();
        seq.extend_from_slice(&head);
    }
    seq
}

/// Covering radius of the orbit of `word` in the full shift: the largest
/// distance from any shift point to the orbit, i.e. `base^(-R)` where `R`
/// is maximal with every length `2R - 1` block occurring cyclically in
/// `word`. Radius 1 means the orbit only covers trivially (diameter).
pub fn density_radius(word: &Word, base: f64) -> Result<f64> {
    if base <= 1.0 || !base.is_finite() {
        return Err(Error::BadMetricBase { base });
    }
    let mut r = 0u32;
    while word.covers_all_factors((2 * (r + 1) - 1) as usize) {
        r += 1;
        if r > 64 {
            break; // alphabet 1 covers every length; radius floor
        }
    }
    Ok(base.powi(-(r as i32)))
}
