//! Lyapunov spectra of periodic orbits and dominated-splitting
//! certificates.
//!
//! For a periodic orbit generated by a word `w` of period `p`, the orbit
//! matrix `B = P_p(0)` has eigenvalue moduli `|l_1| <= .. <= |l_d|` and the
//! Lyapunov exponents are `chi_i = log|l_i| / p`. Partial sums of the top
//! exponents are read from exterior powers: the spectral radius of the
//! i-th wedge of `B` is exactly `|l_d * .. * l_{d-i+1}|`, so each partial
//! sum is a single dominant-eigenvalue computation on a log-scaled
//! product. This stays exact (up to rounding) for periods far beyond
//! anything that can be multiplied out naively.
//!
//! Domination here is the two-bundle inequality with uniform constant 1/2:
//! a splitting `E + F` with `dim E = i` is `T`-dominated when
//! `‖P_T|E(x)‖ * ‖P_T^{-1}|F(shift^T x)‖ < 1/2` at every point `x` of the
//! orbit. Certificates carry the worst phase and the margin to 1/2.

use crate::cocycle::{Cocycle, ProductPlan};
use crate::error::{Error, Result};
use crate::mat::{
    kernel_vectors, orthonormal_span, restricted_conorm, restricted_norm, subspace_gap, Mat,
    ScaledMat,
};
use crate::word::Word;
use num_complex::Complex64;

/// Lyapunov exponents of one periodic orbit, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSpectrum {
    exponents: Vec<f64>,
    period: u64,
}

impl OrbitSpectrum {
    pub fn new(exponents: Vec<f64>, period: u64) -> Self {
        debug_assert!(exponents.windows(2).all(|w| w[0] <= w[1] + 1e-9));
        OrbitSpectrum { exponents, period }
    }

    /// Exponents in ascending order.
    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// i-th smallest exponent, 1-based (`chi_1` is the most contracting).
    pub fn exponent(&self, i: usize) -> f64 {
        assert!(i >= 1 && i <= self.exponents.len(), "exponent index {i} out of range");
        self.exponents[i - 1]
    }

    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// `L_i`: the sum of the `i` largest exponents, the growth rate of
    /// `i`-dimensional volume. `L_0 = 0`, `L_d` = log-determinant rate,
    /// and `chi_i = L_{d-i+1} - L_{d-i}`.
    pub fn partial_sum(&self, i: usize) -> f64 {
        let d = self.exponents.len();
        assert!(i <= d, "partial sum index {i} out of range for dimension {d}");
        self.exponents[d - i..].iter().sum()
    }

    /// Whether all exponents are pairwise distinct.
    pub fn simple(&self) -> bool {
        self.exponents.windows(2).all(|w| w[0] < w[1])
    }

    pub fn min_abs(&self) -> f64 {
        self.exponents.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()))
    }

    /// Number of strictly negative exponents (the index of the orbit).
    pub fn negative_index(&self) -> usize {
        self.exponents.iter().filter(|&&x| x < 0.0).count()
    }

    /// `chi_i + chi_{i+1}`, the volume growth in the two central
    /// directions around position `i` (1-based).
    pub fn center_volume(&self, i: usize) -> f64 {
        assert!(i >= 1 && i < self.exponents.len());
        self.exponents[i - 1] + self.exponents[i]
    }

    /// Do the exponents straddle zero between positions `i` and `i + 1`?
    pub fn zero_in_gap(&self, i: usize) -> bool {
        i >= 1 && i < self.exponents.len() && self.exponents[i - 1] < 0.0 && self.exponents[i] > 0.0
    }

    pub fn is_hyperbolic(&self, threshold: f64) -> bool {
        self.min_abs() > threshold
    }
}

/// Spectrum of the orbit of `word` (phase-independent).
pub fn exact_spectrum(cocycle: &Cocycle, word: &Word) -> Result<OrbitSpectrum> {
    cocycle.check_word(word)?;
    plan_spectrum(cocycle, &ProductPlan::from_word(word))
}

/// Spectrum of the periodic orbit whose period word is described by
/// `plan`. Partial sums of top exponents via exterior powers.
pub fn plan_spectrum(cocycle: &Cocycle, plan: &ProductPlan) -> Result<OrbitSpectrum> {
    let d = cocycle.dim();
    let p = plan.len();
    if p == 0 {
        return Err(Error::EmptyWord);
    }
    let mut partial = Vec::with_capacity(d + 1);
    partial.push(0.0);
    for i in 1..=d {
        let wedge = cocycle.exterior(i)?;
        let b = wedge.eval_plan(plan)?;
        let log_rho = b.log_spectral_radius().map_err(|e| match e {
            Error::DegenerateSpectrum { detail } => Error::DegenerateSpectrum {
                detail: format!("exterior power {i}: {detail}"),
            },
            other => other,
        })?;
        partial.push(log_rho);
    }
    Ok(spectrum_from_partial_logs(&partial, p))
}

/// Converts accumulated partial sums `partial[i] = log |l_d .. l_{d-i+1}|`
/// (with `partial[0] = 0`) into an ascending spectrum.
pub(crate) fn spectrum_from_partial_logs(partial: &[f64], period: u64) -> OrbitSpectrum {
    let d = partial.len() - 1;
    let pf = period as f64;
    let mut exponents: Vec<f64> = (1..=d).map(|i| (partial[i] - partial[i - 1]) / pf).collect();
    exponents.reverse();
    OrbitSpectrum::new(exponents, period)
}

/// Finite-window approximation to the sum of the top `i` exponents:
/// `(1/m) log ‖wedge_i P_m(phase)‖` along the orbit of `word`.
pub fn partial_exponent(
    cocycle: &Cocycle,
    word: &Word,
    phase: u64,
    i: usize,
    m: u64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::BadParameter("window length must be positive".into()));
    }
    let wedge = cocycle.exterior(i)?;
    let p = wedge.product(word, phase, m)?;
    Ok(p.log_op_norm() / m as f64)
}

/// Same finite-window quantity for a plan-described orbit word, window
/// equal to the whole plan.
pub fn plan_partial_exponent(cocycle: &Cocycle, plan: &ProductPlan, i: usize) -> Result<f64> {
    let len = plan.len();
    if len == 0 {
        return Err(Error::EmptyWord);
    }
    let wedge = cocycle.exterior(i)?;
    let p = wedge.eval_plan(plan)?;
    Ok(p.log_op_norm() / len as f64)
}

/// A verified `T`-domination certificate for a splitting of index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingCertificate {
    /// Dimension of the dominated (slow) bundle `E`.
    pub index: usize,
    /// Time scale `T` of the inequality.
    pub t_steps: u32,
    /// `1/2 - max_t ‖P_T|E(t)‖ ‖P_T^{-1}|F(t+T)‖`, strictly positive.
    pub margin: f64,
    /// Phase attaining the worst product.
    pub worst_phase: u64,
    /// Orbit period the certificate covers.
    pub period: u64,
}

/// Outcome of a domination check that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub enum DominationCheck {
    Certified(SplittingCertificate),
    /// The inequality failed at some phase; the product value is reported
    /// (can be large or infinite).
    Failed { worst_phase: u64, worst_product: f64 },
}

impl DominationCheck {
    pub fn is_certified(&self) -> bool {
        matches!(self, DominationCheck::Certified(_))
    }
}

/// Eigenspace splitting of the orbit matrix at every phase: `E` spans the
/// `index` smallest eigenvalue moduli, `F` the rest. Errors with a
/// refusal when the moduli at the cut are too close to separate.
pub fn splitting_bases(
    cocycle: &Cocycle,
    word: &Word,
    index: usize,
) -> Result<(Vec<Vec<Vec<f64>>>, Vec<Vec<Vec<f64>>>)> {
    cocycle.check_word(word)?;
    let d = cocycle.dim();
    if index < 1 || index >= d {
        return Err(Error::BadIndex { index, dim: d });
    }
    let b = cocycle.orbit_product(word, 0)?;
    let (e0, f0) = eigen_split(&b.m, index)?;

    let p = word.period() as usize;
    let mut e_bases = Vec::with_capacity(p);
    let mut f_bases = Vec::with_capacity(p);
    e_bases.push(e0);
    f_bases.push(f0);
    for t in 1..p {
        let g = cocycle.generator(word.cyclic_u(t as u64 - 1));
        let pushed_e: Vec<Vec<f64>> = e_bases[t - 1].iter().map(|v| g.apply(v)).collect();
        let pushed_f: Vec<Vec<f64>> = f_bases[t - 1].iter().map(|v| g.apply(v)).collect();
        e_bases.push(orthonormal_span(d, &pushed_e, 1e-12));
        f_bases.push(orthonormal_span(d, &pushed_f, 1e-12));
        if e_bases[t].len() != index || f_bases[t].len() != d - index {
            return Err(Error::DegenerateSpectrum {
                detail: format!("bundle rank collapsed while transporting to phase {t}"),
            });
        }
    }
    // Closing the loop must return the starting spaces (invariance).
    let g = cocycle.generator(word.cyclic_u(p as u64 - 1));
    let wrapped: Vec<Vec<f64>> = e_bases[p - 1].iter().map(|v| g.apply(v)).collect();
    let wrapped = orthonormal_span(d, &wrapped, 1e-12);
    let drift = subspace_gap(d, &wrapped, &e_bases[0]);
    if drift > 1e-6 {
        return Err(Error::DegenerateSpectrum {
            detail: format!("invariant bundle drifted by {drift:.2e} around the orbit"),
        });
    }
    Ok((e_bases, f_bases))
}

fn eigen_split(bhat: &Mat, index: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let d = bhat.dim();
    let mut eigs: Vec<Complex64> = bhat.complex_eigenvalues();
    eigs.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    let lo = eigs[index - 1].norm();
    let hi = eigs[index].norm();
    if hi - lo <= 1e-9 * hi.max(f64::MIN_POSITIVE) {
        return Err(Error::NoSplitting {
            index,
            detail: format!(
                "eigenvalue moduli {lo:.6e} and {hi:.6e} at the cut are numerically equal"
            ),
        });
    }
    let e = realified_eigenspace(bhat, &eigs[..index])?;
    let f = realified_eigenspace(bhat, &eigs[index..])?;
    if e.len() != index || f.len() != d - index {
        return Err(Error::NoSplitting {
            index,
            detail: format!(
                "eigenspaces span {} + {} dimensions instead of {index} + {}",
                e.len(),
                f.len(),
                d - index
            ),
        });
    }
    Ok((e, f))
}

/// Real span of the eigenspaces for the given eigenvalues (with
/// multiplicity); complex pairs contribute their real and imaginary parts.
fn realified_eigenspace(bhat: &Mat, eigs: &[Complex64]) -> Result<Vec<Vec<f64>>> {
    let d = bhat.dim();
    // Cluster equal eigenvalues to pull multi-dimensional kernels at once.
    let mut remaining: Vec<Complex64> = eigs.to_vec();
    let mut real_cols: Vec<Vec<f64>> = Vec::new();
    while let Some(lam) = remaining.first().copied() {
        let scale = lam.norm().max(1.0);
        let mult = remaining.iter().filter(|z| (**z - lam).norm() <= 1e-8 * scale).count();
        remaining.retain(|z| (*z - lam).norm() > 1e-8 * scale);
        for v in kernel_vectors(bhat, lam, mult) {
            real_cols.push(v.iter().map(|z| z.re).collect());
            if v.iter().any(|z| z.im.abs() > 1e-10) {
                real_cols.push(v.iter().map(|z| z.im).collect());
            }
        }
    }
    Ok(orthonormal_span(d, &real_cols, 1e-9)
        .into_iter()
        .take(eigs.len())
        .collect())
}

/// Checks the `T`-domination inequality at every phase of the orbit of
/// `word`, for the eigenvalue splitting at `index`.
pub fn check_domination(
    cocycle: &Cocycle,
    word: &Word,
    index: usize,
    t_steps: u32,
) -> Result<DominationCheck> {
    if t_steps == 0 {
        return Err(Error::BadParameter("domination time must be positive".into()));
    }
    let (e_bases, f_bases) = splitting_bases(cocycle, word, index)?;
    let p = word.period();
    let d = cocycle.dim();
    let half_log = 0.5_f64.ln();

    let mut worst_log = f64::NEG_INFINITY;
    let mut worst_phase = 0u64;
    let mut scratch = Mat::zeros(d);
    for t in 0..p {
        // Forward product over [t, t+T). Both restrictions are read off the
        // forward product: the norm on E directly, and the expansion on F as
        // the co-norm of the compression onto the arrival F basis. Applying
        // the inverse product to F instead would amplify rounding-level
        // contamination of the basis along E exponentially.
        let mut fwd = ScaledMat::identity(d);
        for k in 0..t_steps as u64 {
            fwd.apply_left(cocycle.generator(word.cyclic_u(t + k)), &mut scratch);
        }
        let arrive = ((t + t_steps as u64) % p) as usize;
        let log_a = fwd.log_scale + restricted_norm(&fwd.m, &e_bases[t as usize]).ln();
        let co = restricted_conorm(&fwd.m, &f_bases[t as usize], &f_bases[arrive]);
        let log_b = -(fwd.log_scale + co.ln());
        let log_prod = log_a + log_b;
        if log_prod > worst_log {
            worst_log = log_prod;
            worst_phase = t;
        }
    }

    if worst_log < half_log {
        Ok(DominationCheck::Certified(SplittingCertificate {
            index,
            t_steps,
            margin: 0.5 - worst_log.exp(),
            worst_phase,
            period: p,
        }))
    } else {
        Ok(DominationCheck::Failed { worst_phase, worst_product: worst_log.exp() })
    }
}

/// Smallest `T <= t_max` whose domination check certifies, if any.
/// Propagates refusals (no separable splitting at this index).
pub fn min_domination_time(
    cocycle: &Cocycle,
    word: &Word,
    index: usize,
    t_max: u32,
) -> Result<Option<u32>> {
    for t in 1..=t_max {
        if check_domination(cocycle, word, index, t)?.is_certified() {
            return Ok(Some(t));
        }
    }
    Ok(None)
}
