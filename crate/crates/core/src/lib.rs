//! Linear matrix cocycles over finite-alphabet full shifts.
//!
//! The crate computes Lyapunov spectra of periodic orbits, certifies
//! dominated splittings with explicit margins, verifies and searches
//! multiple-almost-shadowing witnesses, grows towers of periodic orbits
//! whose central exponent is driven to zero while orbit mass stays bounded
//! below, equalizes consecutive exponents inside one-parameter families,
//! and classifies small models by which of these mechanisms is active.
//!
//! Numerical backbone: products along orbits are held in log-scaled form
//! ([`mat::ScaledMat`]), so orbit lengths in the billions are handled by
//! binary powering without overflow; partial sums of exponents are read
//! off exterior powers, for which norm and spectral radius computations
//! are exact identities rather than approximations.

pub mod cocycle;
pub mod equalizer;
pub mod error;
pub mod mat;
pub mod models;
pub mod shadowing;
pub mod spectrum;
pub mod tower;
pub mod word;

pub use cocycle::{Cocycle, ProductPlan};
pub use equalizer::{
    equalize, monotonicity_report, sequence_spectrum, EqualizeFamily, EqualizeReport,
    MonotonicityReport,
};
pub use error::{Error, Result};
pub use mat::{Mat, ScaledMat};
pub use models::{
    builtin, builtin_names, classify_case, CaseLabel, ClassReport, ClassifyOptions, GeneratorConfig,
    ModelConfig, WordReport,
};
pub use shadowing::{
    aligned_copy_witness, find_witness, max_constant_fiber_witness, verify_witness, GammaSet,
    MasReport, MasWitness,
};
pub use spectrum::{
    check_domination, exact_spectrum, min_domination_time, partial_exponent, plan_partial_exponent,
    plan_spectrum, splitting_bases, DominationCheck, OrbitSpectrum, SplittingCertificate,
};
pub use tower::{
    build_tower, total_variation, tune_center_exponent, ScheduleEntry, Segment, Tower, TowerLevel,
    TowerSchedule, TunerOutcome, TunerWords, WindowReport, ZeroExponentReport, MATERIALIZE_CAP,
};
pub use word::{
    de_bruijn_cycle, de_bruijn_linear, density_radius, match_radius, shift_distance, ShiftPoint,
    Word,
};
