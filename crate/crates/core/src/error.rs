use thiserror::Error;

/// Unified error type for the crate.
///
/// Refusals that are legitimate mathematical outcomes (a domination scan that
/// finds no certificate, a search that proves infeasibility) are reported
/// through dedicated variants so callers can map them to distinct exit paths
/// instead of treating them as crashes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("word is empty")]
    EmptyWord,

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("alphabet mismatch: word uses {word_alphabet}, cocycle has {cocycle_alphabet} generators")]
    AlphabetMismatch {
        word_alphabet: usize,
        cocycle_alphabet: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generator for symbol {symbol} is singular or near-singular (|det| = {det:.3e})")]
    SingularGenerator { symbol: usize, det: f64 },

    #[error("metric base must exceed 1, got {base}")]
    BadMetricBase { base: f64 },

    #[error("degenerate period product: eigenvalue modulus underflows ({detail})")]
    DegenerateSpectrum { detail: String },

    #[error("no invariant splitting of index {index}: {detail}")]
    NoSplitting { index: usize, detail: String },

    #[error("index {index} outside the meaningful range 1..{dim}")]
    BadIndex { index: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("infeasible parameters: {detail}")]
    Infeasible { detail: String },

    #[error("shadowing witness invalid: {detail}")]
    WitnessInvalid { detail: String },

    #[error("exponent tuner cannot reach the target: {detail}")]
    TunerInfeasible { detail: String },

    #[error("period budget exhausted: {detail}")]
    PeriodBudget { detail: String },

    #[error("no admissible window length up to {n_max}: {detail}")]
    WindowNotFound { n_max: u64, detail: String },

    #[error("dominated splitting of index {index} detected (T = {t_steps}, margin {margin:.3e}); equalization hypothesis fails")]
    DominationHypothesis {
        index: usize,
        t_steps: usize,
        margin: f64,
    },

    #[error("perturbation budget exhausted before equalization; achieved gap {achieved_gap:.3e}")]
    BudgetExhausted { achieved_gap: f64 },

    #[error("orbit is not hyperbolic: exponent chi_{position} = {value:.3e} within margin of zero")]
    NonHyperbolic { position: usize, value: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
