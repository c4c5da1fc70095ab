//! Linear cocycles over a full shift: one invertible matrix per symbol,
//! composed along orbits.
//!
//! Time order: walking a word `w` from position `t` for `m` steps produces
//! `P_m(t) = A(w[t+m-1]) * ... * A(w[t+1]) * A(w[t])`, the matrix applied
//! to a vector sitting at time `t` (the first symbol read acts first, so
//! it sits rightmost in the product).
//!
//! Long products are never materialized symbol by symbol when structure is
//! available: a [`ProductPlan`] describes a product as nested
//! concatenations and powers, and evaluation uses binary powering on the
//! scaled representation. This is what keeps astronomically long periodic
//! orbits (periods beyond 10^9) computable to full precision.

use crate::error::{Error, Result};
use crate::mat::{exterior_power, Mat, ScaledMat, MAX_DIM};
use crate::word::Word;

/// A linear cocycle: an invertible generator per alphabet symbol.
#[derive(Debug, Clone)]
pub struct Cocycle {
    dim: usize,
    generators: Vec<Mat>,
    inverses: Vec<Mat>,
    log_dets: Vec<f64>,
}

impl Cocycle {
    pub fn new(generators: Vec<Mat>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::BadParameter("cocycle needs at least one generator".into()));
        }
        let dim = generators[0].dim();
        if dim > MAX_DIM {
            return Err(Error::BadParameter(format!(
                "cocycle dimension {dim} exceeds supported maximum {MAX_DIM}"
            )));
        }
        let mut inverses = Vec::with_capacity(generators.len());
        let mut log_dets = Vec::with_capacity(generators.len());
        for (s, g) in generators.iter().enumerate() {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
            }
            let det = g.determinant();
            if det == 0.0 || !det.is_finite() || det.abs() < 1e-300 {
                return Err(Error::SingularGenerator { symbol: s, det });
            }
            inverses.push(g.inverse().map_err(|_| Error::SingularGenerator { symbol: s, det })?);
            log_dets.push(det.abs().ln());
        }
        Ok(Cocycle { dim, generators, inverses, log_dets })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn alphabet(&self) -> usize {
        self.generators.len()
    }

    #[inline]
    pub fn generator(&self, s: u8) -> &Mat {
        &self.generators[s as usize]
    }

    #[inline]
    pub fn inverse_generator(&self, s: u8) -> &Mat {
        &self.inverses[s as usize]
    }

    #[inline]
    pub fn log_det(&self, s: u8) -> f64 {
        self.log_dets[s as usize]
    }

    pub fn check_word(&self, word: &Word) -> Result<()> {
        if word.alphabet() != self.alphabet() {
            return Err(Error::AlphabetMismatch {
                word_alphabet: word.alphabet(),
                cocycle_alphabet: self.alphabet(),
            });
        }
        Ok(())
    }

    /// Product over `m` consecutive symbols of the periodic extension of
    /// `word`, starting at `phase`. Splits into whole-period powers plus a
    /// remainder so `m` may be astronomically large.
    pub fn product(&self, word: &Word, phase: u64, m: u64) -> Result<ScaledMat> {
        self.check_word(word)?;
        let p = word.period();
        let full = m / p;
        let rem = m % p;
        let mut acc = if full > 0 {
            self.literal_product(word, phase, p)?.pow(full)
        } else {
            ScaledMat::identity(self.dim)
        };
        if rem > 0 {
            let tail = self.literal_product(word, phase, rem)?;
            acc = tail.mul(&acc);
        }
        Ok(acc)
    }

    /// Product over exactly one period, starting at `phase`.
    pub fn orbit_product(&self, word: &Word, phase: u64) -> Result<ScaledMat> {
        self.check_word(word)?;
        self.literal_product(word, phase, word.period())
    }

    fn literal_product(&self, word: &Word, phase: u64, m: u64) -> Result<ScaledMat> {
        debug_assert!(m <= word.period());
        let mut acc = ScaledMat::identity(self.dim);
        let mut scratch = Mat::zeros(self.dim);
        for k in 0..m {
            let s = word.cyclic_u(phase + k);
            acc.apply_left(&self.generators[s as usize], &mut scratch);
        }
        Ok(acc)
    }

    /// Evaluates a product plan (symbols act in plan order, first first).
    pub fn eval_plan(&self, plan: &ProductPlan) -> Result<ScaledMat> {
        match plan {
            ProductPlan::Literal(symbols) => {
                let mut acc = ScaledMat::identity(self.dim);
                let mut scratch = Mat::zeros(self.dim);
                for &s in symbols.iter() {
                    if (s as usize) >= self.alphabet() {
                        return Err(Error::SymbolOutOfRange {
                            symbol: s as usize,
                            alphabet: self.alphabet(),
                        });
                    }
                    acc.apply_left(&self.generators[s as usize], &mut scratch);
                }
                Ok(acc)
            }
            ProductPlan::Seq(parts) => {
                let mut acc = ScaledMat::identity(self.dim);
                for part in parts {
                    let m = self.eval_plan(part)?;
                    acc = m.mul(&acc); // later part acts on the left
                }
                Ok(acc)
            }
            ProductPlan::Power(inner, k) => Ok(self.eval_plan(inner)?.pow(*k)),
        }
    }

    /// The induced cocycle on the i-th exterior power.
    pub fn exterior(&self, i: usize) -> Result<Cocycle> {
        if i < 1 || i > self.dim {
            return Err(Error::BadIndex { index: i, dim: self.dim });
        }
        let generators: Vec<Mat> = self.generators.iter().map(|g| exterior_power(g, i)).collect();
        // Wedge powers of invertible maps are invertible; build directly to
        // skip re-validation (inverse of wedge = wedge of inverse).
        let inverses: Vec<Mat> = self.inverses.iter().map(|g| exterior_power(g, i)).collect();
        let log_dets: Vec<f64> = generators.iter().map(|g| g.determinant().abs().ln()).collect();
        Ok(Cocycle { dim: generators[0].dim(), generators, inverses, log_dets })
    }

    /// Exact log |det| of the product over one period of `word`.
    pub fn log_det_over_word(&self, word: &Word) -> Result<f64> {
        self.check_word(word)?;
        Ok(word.symbols().iter().map(|&s| self.log_dets[s as usize]).sum())
    }

    /// Largest `max(‖A_s‖, ‖A_s^{-1}‖)` over all generators.
    pub fn max_generator_norm(&self) -> f64 {
        let mut best = 0.0_f64;
        for g in self.generators.iter().chain(self.inverses.iter()) {
            best = best.max(g.op_norm());
        }
        best
    }
}

/// Structured description of a product of generators: a word tree with
/// powers. `len()` (total symbol count) can exceed anything materializable.
#[derive(Debug, Clone, PartialEq)]
pub enum ProductPlan {
    /// Explicit symbols, first symbol acting first.
    Literal(Vec<u8>),
    /// Concatenation in time order: parts[0] acts first.
    Seq(Vec<ProductPlan>),
    /// The inner plan repeated `k` times.
    Power(Box<ProductPlan>, u64),
}

impl ProductPlan {
    pub fn from_word(word: &Word) -> ProductPlan {
        ProductPlan::Literal(word.symbols().to_vec())
    }

    /// Total number of symbols described (saturating).
    pub fn len(&self) -> u64 {
        match self {
            ProductPlan::Literal(s) => s.len() as u64,
            ProductPlan::Seq(parts) => parts.iter().fold(0u64, |a, p| a.saturating_add(p.len())),
            ProductPlan::Power(inner, k) => inner.len().saturating_mul(*k),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
