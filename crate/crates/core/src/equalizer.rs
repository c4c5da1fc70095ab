//! Merging two consecutive Lyapunov exponents of a periodic orbit by
//! arbitrarily small rotations along the orbit.
//!
//! The deformation acts on one periodic sequence only: before each step,
//! a rotation mixes the two singular directions of the running partial
//! product that carry the `i`-th and `(i+1)`-th growth rates. Every
//! rotation angle is capped so the perturbed step (and its inverse) stays
//! within `epsilon` of the original in operator norm. Rotations have unit
//! determinant, so the exponent sum is conserved exactly along the whole
//! family.
//!
//! When the orbit carries a dominated splitting of the matching index,
//! no small perturbation can merge those exponents; the search refuses up
//! front and reports the certificate it found instead of burning the
//! budget on a hopeless scan.

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::mat::{binomial, exterior_power, Mat, ScaledMat};
use crate::spectrum::{check_domination, spectrum_from_partial_logs, DominationCheck, OrbitSpectrum};
use crate::word::Word;
use nalgebra::DMatrix;

/// One-parameter family of perturbed periodic sequences. `s = 0` is the
/// unperturbed orbit, `s = 1` the equalized endpoint.
#[derive(Debug, Clone)]
pub struct EqualizeFamily {
    cocycle: Cocycle,
    word: Word,
    index: usize,
    epsilon: f64,
    /// Signed internal parameter of the endpoint; `matrices(s)` uses
    /// `t = s * t_star`, so the public parameter always runs over [0, 1].
    t_star: f64,
    /// Per-symbol angle caps keeping each step `epsilon`-close.
    theta_caps: Vec<f64>,
}

impl EqualizeFamily {
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Internal endpoint parameter (signed; 0 means the orbit already
    /// had the exponents merged and no deformation was needed).
    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn theta_caps(&self) -> &[f64] {
        &self.theta_caps
    }

    /// The perturbed sequence at family parameter `s` in [0, 1], one
    /// matrix per position of the word.
    pub fn sequence(&self, s: f64) -> Vec<Mat> {
        self.sequence_at_t(s * self.t_star)
    }

    fn sequence_at_t(&self, t: f64) -> Vec<Mat> {
        let d = self.cocycle.dim();
        let p = self.word.period() as usize;
        let mut seq = Vec::with_capacity(p);
        let mut partial = ScaledMat::identity(d);
        let mut scratch = Mat::zeros(d);
        for m in 0..p {
            let sym = self.word.symbols()[m];
            let phi = t * self.theta_caps[sym as usize];
            let b = if phi == 0.0 {
                self.cocycle.generator(sym).clone()
            } else {
                // Directions of the i-th and (i+1)-th ascending singular
                // values of the partial product: the state-space plane
                // currently separating the two growth rates.
                let (u, v) = ascending_singular_pair(&partial.m, self.index);
                let g = mixing_rotation(d, &u, &v, phi);
                self.cocycle.generator(sym).mul(&g)
            };
            partial.apply_left(&b, &mut scratch);
            seq.push(b);
        }
        seq
    }

    /// Exponents of the perturbed orbit at family parameter `s`.
    pub fn spectrum(&self, s: f64) -> Result<OrbitSpectrum> {
        sequence_spectrum(&self.sequence(s), self.word.period())
    }

    /// Gap between the two targeted exponents at family parameter `s`.
    pub fn gap(&self, s: f64) -> Result<f64> {
        let spec = self.spectrum(s)?;
        Ok(spec.exponent(self.index + 1) - spec.exponent(self.index))
    }
}

/// Result of a successful equalization.
#[derive(Debug, Clone)]
pub struct EqualizeReport {
    pub family: EqualizeFamily,
    /// Endpoint gap, at most the requested tolerance.
    pub achieved_gap: f64,
    /// Internal parameter of the endpoint (signed).
    pub t_star: f64,
    /// `(t, gap)` samples from the ascending scan, in visit order.
    pub scan: Vec<(f64, f64)>,
    /// Domination horizon that was cleared before deforming.
    pub domination_scanned: u32,
}

/// Gap profile along the finished family.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// `(s, gap)` at evenly spaced family parameters.
    pub samples: Vec<(f64, f64)>,
    /// Whether the gap never rises (up to 1e-9) between samples.
    pub monotone: bool,
    /// Largest rise between consecutive samples (0 when monotone).
    pub max_rise: f64,
}

/// Samples the gap along `family` and reports how close to monotone the
/// approach to the merged endpoint is.
pub fn monotonicity_report(family: &EqualizeFamily, samples: usize) -> Result<MonotonicityReport> {
    if samples < 1 {
        return Err(Error::BadParameter("need at least one sample interval".into()));
    }
    let mut pts = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let s = k as f64 / samples as f64;
        pts.push((s, family.gap(s)?));
    }
    let mut max_rise = 0.0_f64;
    for w in pts.windows(2) {
        max_rise = max_rise.max(w[1].1 - w[0].1);
    }
    Ok(MonotonicityReport { samples: pts, monotone: max_rise <= 1e-9, max_rise })
}

/// Deforms the orbit of `word` until the exponents `index` and
/// `index + 1` agree within `tol`.
///
/// Refuses with the certificate when an `index`-dominated splitting is
/// certified at any time scale up to `domination_horizon`. Scans the
/// internal parameter over `grid` steps in both rotation orientations,
/// then sharpens the first crossing by bisection; fails with the best gap
/// reached when the angle caps (set by `epsilon`) are too small.
pub fn equalize(
    cocycle: &Cocycle,
    word: &Word,
    index: usize,
    epsilon: f64,
    grid: usize,
    domination_horizon: u32,
    tol: f64,
) -> Result<EqualizeReport> {
    cocycle.check_word(word)?;
    let d = cocycle.dim();
    if index < 1 || index >= d {
        return Err(Error::BadIndex { index, dim: d });
    }
    if !(epsilon > 0.0) {
        return Err(Error::BadParameter(format!("epsilon {epsilon} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(Error::BadParameter(format!("tolerance {tol} must be positive")));
    }
    if grid < 1 {
        return Err(Error::BadParameter("grid needs at least one step".into()));
    }

    // A dominated splitting of this index is an obstruction, not a large
    // gap: refuse as soon as any horizon certifies one.
    for t_steps in 1..=domination_horizon {
        match check_domination(cocycle, word, index, t_steps) {
            Ok(DominationCheck::Certified(cert)) => {
                return Err(Error::DominationHypothesis {
                    index,
                    t_steps: cert.t_steps as usize,
                    margin: cert.margin,
                });
            }
            Ok(DominationCheck::Failed { .. }) => {}
            // Without an eigen-splitting there is nothing to certify at
            // any horizon; move on to the deformation.
            Err(Error::NoSplitting { .. }) | Err(Error::DegenerateSpectrum { .. }) => break,
            Err(e) => return Err(e),
        }
    }

    let theta_caps: Vec<f64> = (0..cocycle.alphabet())
        .map(|s| {
            let g = cocycle.generator(s as u8);
            let gi = cocycle.inverse_generator(s as u8);
            let norm = g.op_norm().max(gi.op_norm());
            // ‖A (G - I)‖ <= ‖A‖ 2 sin(theta/2); cap strictly inside.
            2.0 * ((epsilon / (2.0 * norm)).min(1.0) * (1.0 - 1e-6)).asin()
        })
        .collect();

    let mut family = EqualizeFamily {
        cocycle: cocycle.clone(),
        word: word.clone(),
        index,
        epsilon,
        t_star: 1.0,
        theta_caps,
    };
    let gap_at = |fam: &EqualizeFamily, t: f64| -> Result<f64> {
        let spec = sequence_spectrum(&fam.sequence_at_t(t), fam.word.period())?;
        Ok(spec.exponent(index + 1) - spec.exponent(index))
    };

    let mut scan = Vec::new();
    let gap0 = gap_at(&family, 0.0)?;
    scan.push((0.0, gap0));
    if gap0 <= tol {
        family.t_star = 0.0;
        return Ok(EqualizeReport {
            family,
            achieved_gap: gap0,
            t_star: 0.0,
            scan,
            domination_scanned: domination_horizon,
        });
    }

    let mut best_gap = gap0;
    for k in 1..=grid {
        for sign in [1.0_f64, -1.0] {
            let t = sign * k as f64 / grid as f64;
            let g = gap_at(&family, t)?;
            scan.push((t, g));
            best_gap = best_gap.min(g);
            if g <= tol {
                // Sharpen the crossing toward the smallest |t| that
                // still meets the tolerance.
                let mut lo = sign * (k - 1) as f64 / grid as f64;
                let mut hi = t;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if gap_at(&family, mid)? <= tol {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let achieved = gap_at(&family, hi)?;
                family.t_star = hi;
                return Ok(EqualizeReport {
                    family,
                    achieved_gap: achieved,
                    t_star: hi,
                    scan,
                    domination_scanned: domination_horizon,
                });
            }
        }
    }
    Err(Error::BudgetExhausted { achieved_gap: best_gap })
}

/// Exponents of an explicit periodic matrix sequence, by the same
/// exterior-power route used for cocycle orbits.
pub fn sequence_spectrum(seq: &[Mat], period: u64) -> Result<OrbitSpectrum> {
    assert!(!seq.is_empty(), "empty sequence has no spectrum");
    let d = seq[0].dim();
    let mut partial = vec![0.0];
    for j in 1..=d {
        let dim_j = binomial(d, j);
        let mut acc = ScaledMat::identity(dim_j);
        let mut scratch = Mat::zeros(dim_j);
        for b in seq {
            let w = exterior_power(b, j);
            acc.apply_left(&w, &mut scratch);
        }
        partial.push(acc.log_spectral_radius()?);
    }
    Ok(spectrum_from_partial_logs(&partial, period))
}

/// Left singular vectors for the `i`-th and `(i+1)`-th singular values in
/// ascending order. Ties fall back to the solver's deterministic frame.
fn ascending_singular_pair(m: &Mat, i: usize) -> (Vec<f64>, Vec<f64>) {
    let d = m.dim();
    debug_assert!(i >= 1 && i < d);
    let svd = m.to_na().svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a].partial_cmp(&svd.singular_values[b]).expect("finite singular values")
    });
    (na_column(&u, order[i - 1]), na_column(&u, order[i]))
}

fn na_column(u: &DMatrix<f64>, c: usize) -> Vec<f64> {
    (0..u.nrows()).map(|r| u[(r, c)]).collect()
}

/// Rotation by `phi` in the plane spanned by the orthonormal pair
/// `(u, v)`, identity on the orthogonal complement.
fn mixing_rotation(d: usize, u: &[f64], v: &[f64], phi: f64) -> Mat {
    let (c, s) = (phi.cos(), phi.sin());
    let mut g = Mat::identity(d);
    for r in 0..d {
        for q in 0..d {
            let add = (c - 1.0) * (u[r] * u[q] + v[r] * v[q]) + s * (v[r] * u[q] - u[r] * v[q]);
            g.set(r, q, g.get(r, q) + add);
        }
    }
    g
}
