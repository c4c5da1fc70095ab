//! Multiple almost shadowing between periodic orbits.
//!
//! A periodic point `q` (word of period `P`) shadows a periodic point `p`
//! (word of period `pi`) with quality `(gamma, kappa)` when a set `Gamma`
//! of at least `kappa * P` phases of `q` comes with an assignment
//! `rho: Gamma -> orb(p)` such that
//!
//! - every point of `orb(p)` receives the same number of phases
//!   (constant fibers), and
//! - for each assigned phase `t` and every `j < pi`, the shifted points
//!   stay `gamma`-close: `d(shift^j q_t, shift^j rho(t)) < gamma`.
//!
//! With the symmetric metric `base^(-first mismatch)`, the closeness
//! condition for all `j < pi` collapses to a single contiguous symbol
//! agreement interval: `q[t+u] = p[s+u]` for `u` in
//! `[1 - r, pi + r - 2]`, where `r` is the matching radius of `gamma`.
//! That makes both verification and search purely combinatorial.

use crate::error::{Error, Result};
use crate::word::{match_radius, Word};

/// The phase set `Gamma` together with its assignment to `orb(p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaSet {
    /// Explicit `(t, s)` pairs: phase `t` of `q` assigned to phase `s` of
    /// the primitive period word of `p`.
    Dense(Vec<(u64, u64)>),
    /// `t` running over `[start, start + count)` with assignment
    /// `s = (s0 + (t - start)) mod p_period`; used for copy regions whose
    /// length would be absurd to enumerate.
    Aligned { start: u64, count: u64, s0: u64, p_period: u64 },
}

impl GammaSet {
    pub fn size(&self) -> u64 {
        match self {
            GammaSet::Dense(v) => v.len() as u64,
            GammaSet::Aligned { count, .. } => *count,
        }
    }

    /// Iterates `(t, s)` pairs. Call only when `size()` is moderate.
    pub fn members(&self) -> Box<dyn Iterator<Item = (u64, u64)> + '_> {
        match self {
            GammaSet::Dense(v) => Box::new(v.iter().copied()),
            GammaSet::Aligned { start, count, s0, p_period } => {
                let (start, s0, p) = (*start, *s0, *p_period);
                Box::new((0..*count).map(move |k| (start + k, (s0 + k) % p)))
            }
        }
    }
}

/// A claimed `(gamma, kappa)` shadowing witness.
#[derive(Debug, Clone, PartialEq)]
pub struct MasWitness {
    pub gamma: f64,
    pub kappa: f64,
    pub base: f64,
    pub gamma_set: GammaSet,
}

/// What a successful verification measured.
#[derive(Debug, Clone, PartialEq)]
pub struct MasReport {
    /// |Gamma|
    pub size: u64,
    /// Phases per orbit point of `p` (constant by definition).
    pub fiber_size: u64,
    /// |Gamma| / period(q); at least the witness kappa.
    pub kappa_achieved: f64,
    /// All verified distances are at most this (`base^-r < gamma`).
    pub distance_bound: f64,
    /// Primitive period of `p` actually used for orbit bookkeeping.
    pub p_period: u64,
}

const VERIFY_LIMIT: u64 = 10_000_000;

/// Checks every condition of the witness against the actual symbols.
/// `wp` is reduced to its primitive root first, since the orbit of the
/// generated point only sees the primitive period.
pub fn verify_witness(wq: &Word, wp: &Word, witness: &MasWitness) -> Result<MasReport> {
    if wq.alphabet() != wp.alphabet() {
        return Err(Error::AlphabetMismatch {
            word_alphabet: wp.alphabet(),
            cocycle_alphabet: wq.alphabet(),
        });
    }
    if !(witness.kappa > 0.0) || witness.kappa > 1.0 {
        return Err(Error::BadParameter(format!("kappa {} outside (0, 1]", witness.kappa)));
    }
    let r = match_radius(witness.gamma, witness.base)? as i64;
    let p = wp.primitive_root();
    let pi = p.period();
    let pq = wq.period();
    let size = witness.gamma_set.size();
    if size > VERIFY_LIMIT {
        return Err(Error::BadParameter(format!(
            "witness of size {size} exceeds the explicit verification limit {VERIFY_LIMIT}"
        )));
    }

    // Constant fibers and well-formed members.
    let mut fiber = vec![0u64; pi as usize];
    let mut seen = std::collections::HashSet::with_capacity(size as usize);
    for (t, s) in witness.gamma_set.members() {
        if t >= pq {
            return Err(Error::WitnessInvalid { detail: format!("phase {t} outside the period {pq}") });
        }
        if s >= pi {
            return Err(Error::WitnessInvalid {
                detail: format!("assignment {s} outside the primitive period {pi}"),
            });
        }
        if !seen.insert(t) {
            return Err(Error::WitnessInvalid { detail: format!("phase {t} listed twice") });
        }
        fiber[s as usize] += 1;
    }
    let f0 = fiber[0];
    if let Some(s) = fiber.iter().position(|&f| f != f0) {
        return Err(Error::WitnessInvalid {
            detail: format!("fiber over orbit point {s} has {} phases, expected {f0}", fiber[s]),
        });
    }

    // Coverage fraction.
    let kappa_achieved = size as f64 / pq as f64;
    if kappa_achieved + 1e-12 < witness.kappa {
        return Err(Error::WitnessInvalid {
            detail: format!(
                "coverage {kappa_achieved:.6} below the required kappa {:.6}",
                witness.kappa
            ),
        });
    }

    // Closeness: the contiguous agreement interval for each member.
    for (t, s) in witness.gamma_set.members() {
        for u in (1 - r)..=(pi as i64 + r - 2) {
            let a = wq.cyclic(t as i64 + u);
            let b = p.cyclic(s as i64 + u);
            if a != b {
                return Err(Error::WitnessInvalid {
                    detail: format!(
                        "phase {t} assigned to {s}: symbols differ at offset {u} ({a} vs {b})"
                    ),
                });
            }
        }
    }

    Ok(MasReport {
        size,
        fiber_size: f0,
        kappa_achieved,
        distance_bound: witness.base.powi(-(r as i32)),
        p_period: pi,
    })
}

/// Largest constant-fiber witness of `wq` shadowing `wp` at quality
/// `gamma`, regardless of any kappa target. Exact maximizer of the fiber
/// size via augmenting-path matching with rollback of incomplete rounds.
/// `None` when even fiber size 1 is impossible.
pub fn max_constant_fiber_witness(
    wq: &Word,
    wp: &Word,
    gamma: f64,
    base: f64,
) -> Result<Option<MasWitness>> {
    if wq.alphabet() != wp.alphabet() {
        return Err(Error::AlphabetMismatch {
            word_alphabet: wp.alphabet(),
            cocycle_alphabet: wq.alphabet(),
        });
    }
    let r = match_radius(gamma, base)? as i64;
    let p = wp.primitive_root();
    let pi = p.period() as usize;
    let pq = wq.period() as usize;

    // admissible[t] = all s whose agreement interval matches at phase t.
    let mut admissible: Vec<Vec<usize>> = vec![Vec::new(); pq];
    for (t, adm) in admissible.iter_mut().enumerate() {
        's_loop: for s in 0..pi {
            for u in (1 - r)..=(pi as i64 + r - 2) {
                if wq.cyclic(t as i64 + u) != p.cyclic(s as i64 + u) {
                    continue 's_loop;
                }
            }
            adm.push(s);
        }
    }
    // owner[t] = the orbit point currently assigned phase t.
    let mut owner: Vec<Option<usize>> = vec![None; pq];
    // ts_of[s] = phases currently serving s (for augmenting paths).
    let mut ts_of: Vec<Vec<usize>> = vec![Vec::new(); pi];
    // by_s[s] = phases that could serve s.
    let mut by_s: Vec<Vec<usize>> = vec![Vec::new(); pi];
    for (t, adm) in admissible.iter().enumerate() {
        for &s in adm {
            by_s[s].push(t);
        }
    }

    fn augment(
        s: usize,
        by_s: &[Vec<usize>],
        owner: &mut [Option<usize>],
        ts_of: &mut [Vec<usize>],
        visited_t: &mut [bool],
    ) -> bool {
        for &t in &by_s[s] {
            if visited_t[t] {
                continue;
            }
            visited_t[t] = true;
            match owner[t] {
                None => {
                    owner[t] = Some(s);
                    ts_of[s].push(t);
                    return true;
                }
                Some(other) => {
                    // Try to reroute one of `other`'s phases elsewhere.
                    if augment(other, by_s, owner, ts_of, visited_t) {
                        ts_of[other].retain(|&x| x != t);
                        owner[t] = Some(s);
                        ts_of[s].push(t);
                        return true;
                    }
                }
            }
        }
        false
    }

    let mut fiber = 0u64;
    loop {
        let snapshot_owner = owner.clone();
        let mut complete = true;
        for s in 0..pi {
            let mut visited = vec![false; pq];
            if !augment(s, &by_s, &mut owner, &mut ts_of, &mut visited) {
                complete = false;
                break;
            }
        }
        if complete {
            fiber += 1;
        } else {
            // Roll back the half-finished round; `ts_of` is only scratch
            // for the augmenting paths and is not read past this point.
            owner = snapshot_owner;
            break;
        }
    }

    if fiber == 0 {
        return Ok(None);
    }
    let mut members: Vec<(u64, u64)> = owner
        .iter()
        .enumerate()
        .filter_map(|(t, s)| s.map(|s| (t as u64, s as u64)))
        .collect();
    members.sort_unstable();
    let kappa_achieved = members.len() as f64 / pq as f64;
    Ok(Some(MasWitness {
        gamma,
        kappa: kappa_achieved,
        base,
        gamma_set: GammaSet::Dense(members),
    }))
}

/// Witness search with a kappa requirement: the maximal constant-fiber
/// witness if it reaches `kappa`, otherwise `None`.
pub fn find_witness(
    wq: &Word,
    wp: &Word,
    gamma: f64,
    kappa: f64,
    base: f64,
) -> Result<Option<MasWitness>> {
    if !(kappa > 0.0) || kappa > 1.0 {
        return Err(Error::BadParameter(format!("kappa {kappa} outside (0, 1]")));
    }
    match max_constant_fiber_witness(wq, wp, gamma, base)? {
        Some(mut w) if w.gamma_set.size() as f64 + 1e-12 >= kappa * wq.period() as f64 => {
            w.kappa = kappa;
            Ok(Some(w))
        }
        _ => Ok(None),
    }
}

/// Aligned witness for a word known to contain a phase-aligned copy block
/// of `p^m`: positions `region_start + u` of `q` agree with `p^infinity[u]`
/// for `-left_pad <= u < copy_len`. Returns the largest aligned range
/// (trimmed to whole fibers) that the agreement supports, with its
/// coverage fraction of `q_period`. Pure arithmetic; no symbols touched.
pub fn aligned_copy_witness(
    region_start: u64,
    left_pad: u64,
    copy_len: u64,
    p_period: u64,
    q_period: u64,
    gamma: f64,
    base: f64,
) -> Result<Option<(GammaSet, f64)>> {
    let r = match_radius(gamma, base)? as i64;
    let lo = (r - 1 - left_pad as i64).max(0);
    let hi_incl = copy_len as i64 - p_period as i64 - r + 1;
    if hi_incl < lo {
        return Ok(None);
    }
    let raw = (hi_incl - lo + 1) as u64;
    let fibers = raw / p_period;
    if fibers == 0 {
        return Ok(None);
    }
    let count = fibers * p_period;
    let start = region_start + lo as u64;
    let s0 = (lo as u64) % p_period;
    let kappa = count as f64 / q_period as f64;
    Ok(Some((GammaSet::Aligned { start, count, s0, p_period }, kappa)))
}
